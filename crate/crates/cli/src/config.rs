//! Run configuration: one TOML file describes a whole run, and every output
//! file carries a hash of it so results stay traceable to their inputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use driftlab_core::diffop::DriftOperator;
use driftlab_core::lps::SourceFunction;
use driftlab_core::quadrature::QuadConfig;
use driftlab_core::space::Point;
use driftlab_core::specfun::MultiIndex;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub quadrature: Option<QuadSection>,
    pub eval: Option<EvalSection>,
    pub apply: Option<ApplySection>,
    pub levelset: Option<LevelsetSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_depth: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// heat | heat_dt | heat_dx | poisson | poisson_dt | riesz |
    /// riesz_quadrature | riesz_grad | frac_power | v_kappa | t_op
    pub kernel: String,
    pub n: usize,
    pub t: Option<Vec<f64>>,
    pub k: Option<usize>,
    /// gradient component for riesz_grad (0 is the drift axis)
    pub j: Option<usize>,
    pub kappa: Option<f64>,
    /// coefficient and multi-index pairs, e.g. [[1.0, [2, 1]]]
    pub operator: Option<Vec<(f64, Vec<usize>)>>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplySection {
    /// riesz | heat | vertical_heat | vertical_poisson | horizontal_sq |
    /// horizontal_max | v_kappa | t_op
    pub transform: String,
    pub n: usize,
    pub k: Option<usize>,
    pub t: Option<f64>,
    pub kappa: Option<f64>,
    pub operator: Option<Vec<(f64, Vec<usize>)>>,
    pub source: SourceSpec,
    pub points: Option<Vec<Vec<f64>>>,
    pub points_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// ball | points
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub normalize: Option<bool>,
    /// point and weight pairs, e.g. [[[0.0, 0.0], 1.0]]
    pub masses: Option<Vec<(Vec<f64>, f64)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsetSection {
    pub n: usize,
    pub source: SourceSpec,
    pub rect_lo: Vec<f64>,
    pub rect_hi: Vec<f64>,
    /// explicit level values, or use lambda_range
    pub lambdas: Option<Vec<f64>>,
    /// (smallest, largest, count), log-spaced
    pub lambda_range: Option<(f64, f64, usize)>,
    pub grid: Option<usize>,
}

impl RunConfig {
    pub fn quad(&self) -> QuadConfig {
        let mut cfg = QuadConfig::default();
        if let Some(q) = &self.quadrature {
            if let Some(r) = q.rel_tol {
                cfg.rel_tol = r;
            }
            if let Some(a) = q.abs_tol {
                cfg.abs_tol = a;
            }
            if let Some(d) = q.max_depth {
                cfg.max_depth = d;
            }
        }
        cfg
    }
}

/// Read and parse a config file; the second value is the first 16 hex
/// digits of the SHA-256 of the raw file bytes.
pub fn load(path: &Path) -> Result<(RunConfig, String)> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&raw)
        .with_context(|| format!("config error in {}", path.display()))?;
    Ok((cfg, short_hash(raw.as_bytes())))
}

/// First 16 hex digits of SHA-256, used to stamp outputs.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn parse_operator(n: usize, spec: &[(f64, Vec<usize>)]) -> Result<DriftOperator> {
    let terms = spec
        .iter()
        .map(|(c, alpha)| {
            if alpha.len() != n {
                bail!("multi-index {alpha:?} has {} entries, dimension is {n}", alpha.len());
            }
            Ok((*c, MultiIndex(alpha.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    DriftOperator::new(n, terms).map_err(|e| anyhow::anyhow!("operator: {e}"))
}

pub fn parse_point(n: usize, coords: &[f64]) -> Result<Point> {
    if coords.len() != n {
        bail!("point {coords:?} has {} coordinates, dimension is {n}", coords.len());
    }
    Ok(Point::from_coords(coords))
}

impl SourceSpec {
    pub fn build(&self, n: usize) -> Result<SourceFunction> {
        let normalize = self.normalize.unwrap_or(false);
        match self.kind.as_str() {
            "ball" => {
                let center = match &self.center {
                    Some(c) => parse_point(n, c)?,
                    None => Point::new(0.0, vec![0.0; n - 1]),
                };
                let radius = self.radius.unwrap_or(1.0);
                SourceFunction::indicator_ball(center, radius, normalize)
                    .map_err(|e| anyhow::anyhow!("source: {e}"))
            }
            "points" => {
                let masses = self
                    .masses
                    .as_ref()
                    .context("source kind \"points\" needs a masses list")?;
                let parsed = masses
                    .iter()
                    .map(|(c, w)| Ok((parse_point(n, c)?, *w)))
                    .collect::<Result<Vec<_>>>()?;
                SourceFunction::point_masses(parsed, normalize)
                    .map_err(|e| anyhow::anyhow!("source: {e}"))
            }
            other => bail!("unknown source kind {other:?} (expected \"ball\" or \"points\")"),
        }
    }
}
