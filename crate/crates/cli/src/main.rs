//! Command-line surface for the drift-Laplacian laboratory.
//!
//! Four subcommands: `eval` tabulates kernels, `apply` runs applied
//! operators on a source function, `levelset` tabulates level-set measures
//! of the model operator, and `verify` runs the estimate suites. Runs are
//! reproducible: every output file starts with a comment line carrying a
//! hash of the configuration and the seed, and the same inputs produce the
//! same bytes.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use driftlab_core::diffop::DriftOperator;
use driftlab_core::kernels::{heat, poisson, riesz, v_kappa_sl};
use driftlab_core::logspace::SignedLog;
use driftlab_core::lps::{
    heat_apply_sl, horizontal_max_sl, horizontal_sq_sl, level_set_measure_ln, riesz_apply_sl,
    t_op_apply_sl, t_op_kernel_sl, v_kappa_apply_sl, vertical_sq_sl, Semigroup,
};
use driftlab_core::quadrature::QuadConfig;
use driftlab_core::space::{Point, Region};
use driftlab_core::verify::{
    estimate_ratio_suite, lemzz_window_suite, run_all, scalar_orlicz_inequality_test,
    sharpness_suite, weak_type_outcome, RatioSuite, SharpnessFamily, SuiteOutcome, SuiteTarget,
    VerifyConfig, WeakTypeOp, GROWTH_TOLERANCE,
};

use config::{load, parse_operator, parse_point, short_hash, RunConfig};

#[derive(Parser)]
#[command(
    name = "driftlab",
    version,
    about = "kernels, square functions and estimate suites for the drift Laplacian"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate a kernel over configured arguments (needs --config)
    Eval(PlainArgs),
    /// Apply an operator to a source function at points (needs --config)
    Apply(PlainArgs),
    /// Tabulate level-set measures of the model operator (needs --config)
    Levelset(PlainArgs),
    /// Run verification suites and write a report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: from config, else "driftlab-out")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed stamped into outputs and used by randomized suites
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlainArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run: riesz_local, riesz_global, lp_local, lp_global,
    /// time_sq, time_sup, poisson_time_sq, sharpness_riesz,
    /// sharpness_vertical_heat, sharpness_vertical_poisson,
    /// sharpness_horizontal, sharpness_window, weak_type, orlicz, all
    #[arg(required = true)]
    suites: Vec<String>,
    /// Ambient dimension
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Derivative order (time suites, horizontal families)
    #[arg(long)]
    k: Option<usize>,
    /// Drift-direction power (operator suites, sharpness, weak_type)
    #[arg(long)]
    q: Option<usize>,
    /// Operator family for weak_type: riesz, vertical_heat,
    /// vertical_poisson, horizontal_sq, horizontal_max
    #[arg(long)]
    op: Option<String>,
    /// Orlicz exponent (default: 3, 4 and 6)
    #[arg(long)]
    kappa: Option<f64>,
    /// Orlicz sample count
    #[arg(long)]
    trials: Option<usize>,
    /// Samples per leg or per slab
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated slab heights, e.g. 50,100,200
    #[arg(long)]
    etas: Option<String>,
    /// Slope tolerance for weak_type fits
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = match &cli.cmd {
        Cmd::Eval(a) | Cmd::Apply(a) | Cmd::Levelset(a) => &a.common,
        Cmd::Verify(a) => &a.common,
    };
    if let Some(th) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(th)
            .build_global()
            .ok();
    }
    let (cfg, cfg_hash) = match &common.config {
        Some(path) => {
            let (c, h) = load(path)?;
            (c, Some(h))
        }
        None => (RunConfig::default(), None),
    };
    let seed = common.seed.or(cfg.seed).unwrap_or(7);
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("driftlab-out"));
    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;

    match cli.cmd {
        Cmd::Eval(_) => {
            let section = cfg.eval.as_ref().context("config has no [eval] section")?;
            let hash = cfg_hash.context("eval needs --config")?;
            let (headers, rows) = eval_rows(section, &cfg.quad())?;
            let path = out.join("eval.csv");
            write_csv(&path, &hash, seed, &headers, &rows)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(true)
        }
        Cmd::Apply(_) => {
            let section = cfg.apply.as_ref().context("config has no [apply] section")?;
            let hash = cfg_hash.context("apply needs --config")?;
            let (headers, rows) = apply_rows(section, &cfg.quad())?;
            let path = out.join("apply.csv");
            write_csv(&path, &hash, seed, &headers, &rows)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(true)
        }
        Cmd::Levelset(_) => {
            let section = cfg
                .levelset
                .as_ref()
                .context("config has no [levelset] section")?;
            let hash = cfg_hash.context("levelset needs --config")?;
            let (headers, rows) = levelset_rows(section)?;
            let path = out.join("levelset.csv");
            write_csv(&path, &hash, seed, &headers, &rows)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(true)
        }
        Cmd::Verify(args) => {
            let quad = cfg
                .quadrature
                .as_ref()
                .map(|_| cfg.quad())
                .unwrap_or_else(|| VerifyConfig::default().quad);
            let hash = cfg_hash.unwrap_or_else(|| short_hash(verify_stamp(&args, seed).as_bytes()));
            cmd_verify(&args, &quad, &out, &hash, seed)
        }
    }
}

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

fn fmt_cell(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

fn write_csv(
    path: &Path,
    cfg_hash: &str,
    seed: u64,
    headers: &[String],
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "# driftlab config_hash={cfg_hash} seed={seed}").unwrap();
    writeln!(s, "{}", headers.join(",")).unwrap();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_cell(*v)).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}

fn coord_headers(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn value_columns(v: SignedLog, err: f64) -> [f64; 4] {
    let log10 = if v.sign == 0 {
        f64::NEG_INFINITY
    } else {
        v.ln_abs / std::f64::consts::LN_10
    };
    [v.to_f64(), log10, f64::from(v.sign), err]
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn eval_rows(section: &config::EvalSection, quad: &QuadConfig) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let n = section.n;
    let kernel = section.kernel.as_str();
    let needs_t = matches!(kernel, "heat" | "heat_dt" | "heat_dx" | "poisson" | "poisson_dt");
    let known = [
        "heat",
        "heat_dt",
        "heat_dx",
        "poisson",
        "poisson_dt",
        "riesz",
        "riesz_quadrature",
        "riesz_grad",
        "frac_power",
        "v_kappa",
        "t_op",
    ];
    if !known.contains(&kernel) {
        bail!("unknown kernel {kernel:?} (expected one of {known:?})");
    }
    let op = section
        .operator
        .as_ref()
        .map(|spec| parse_operator(n, spec))
        .transpose()?;
    let need_op = |what: &str| -> Result<&DriftOperator> {
        op.as_ref()
            .with_context(|| format!("kernel {what:?} needs an operator"))
    };
    let need_k = |what: &str| -> Result<usize> {
        section.k.with_context(|| format!("kernel {what:?} needs k"))
    };
    let ts: Vec<f64> = if needs_t {
        let ts = section
            .t
            .clone()
            .with_context(|| format!("kernel {kernel:?} needs a t list"))?;
        if ts.iter().any(|t| !(*t > 0.0)) {
            bail!("t values must be positive");
        }
        ts
    } else {
        vec![f64::NAN]
    };
    let xs: Vec<Point> = section.x.iter().map(|c| parse_point(n, c)).collect::<Result<_>>()?;
    let ys: Vec<Point> = section.y.iter().map(|c| parse_point(n, c)).collect::<Result<_>>()?;
    if xs.is_empty() || ys.is_empty() {
        bail!("x and y lists must be nonempty");
    }

    let mut headers = Vec::new();
    if needs_t {
        headers.push("t".to_string());
    }
    headers.extend(coord_headers("x", n));
    headers.extend(coord_headers("y", n));
    headers.extend(["value", "log10_abs", "sign", "error_est"].map(String::from));

    let mut rows = Vec::new();
    for &t in &ts {
        for x in &xs {
            for y in &ys {
                let (v, err): (SignedLog, f64) = match kernel {
                    "heat" => (heat::heat_sl(t, x, y), 0.0),
                    "heat_dt" => (heat::heat_dt_sl(need_k("heat_dt")?, t, x, y), 0.0),
                    "heat_dx" => (need_op("heat_dx")?.apply_heat_sl(t, x, y), 0.0),
                    "poisson" => {
                        let v = poisson::poisson_sl(t, x, y)?;
                        (v, v.abs().to_f64() * quad.rel_tol)
                    }
                    "poisson_dt" => {
                        let v = poisson::poisson_dt_sl(need_k("poisson_dt")?, t, x, y)?;
                        (v, v.abs().to_f64() * quad.rel_tol)
                    }
                    "riesz" => {
                        let v = riesz::riesz_kernel_sl(need_op("riesz")?, x, y)?;
                        (v, v.abs().to_f64() * quad.rel_tol)
                    }
                    "riesz_quadrature" => {
                        let (v, ln_err) = riesz::riesz_kernel_quadrature(need_op("riesz_quadrature")?, x, y)?;
                        (v, ln_err.exp())
                    }
                    "riesz_grad" => {
                        let j = section.j.context("kernel \"riesz_grad\" needs j")?;
                        let v = riesz::riesz_grad_y_sl(need_op("riesz_grad")?, j, x, y)?;
                        (v, v.abs().to_f64() * quad.rel_tol)
                    }
                    "frac_power" => {
                        let v = riesz::frac_power_kernel_sl(need_k("frac_power")?, x, y)?;
                        (v, v.abs().to_f64() * quad.rel_tol)
                    }
                    "v_kappa" => {
                        let kappa = section.kappa.context("kernel \"v_kappa\" needs kappa")?;
                        (v_kappa_sl(kappa, x, y), 0.0)
                    }
                    "t_op" => (t_op_kernel_sl(x, y), 0.0),
                    _ => unreachable!(),
                };
                let mut row = Vec::new();
                if needs_t {
                    row.push(t);
                }
                row.extend(x.coords());
                row.extend(y.coords());
                row.extend(value_columns(v, err));
                rows.push(row);
            }
        }
    }
    Ok((headers, rows))
}

// ---------------------------------------------------------------------------
// apply
// ---------------------------------------------------------------------------

fn read_points_file(n: usize, path: &Path) -> Result<Vec<Point>> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read points file {}", path.display()))?;
    let mut pts = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number on line {} of {}", i + 1, path.display()))
            })
            .collect::<Result<_>>()?;
        pts.push(parse_point(n, &coords)?);
    }
    if pts.is_empty() {
        bail!("points file {} holds no points", path.display());
    }
    Ok(pts)
}

fn apply_rows(section: &config::ApplySection, quad: &QuadConfig) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let n = section.n;
    let transform = section.transform.as_str();
    let known = [
        "riesz",
        "heat",
        "vertical_heat",
        "vertical_poisson",
        "horizontal_sq",
        "horizontal_max",
        "v_kappa",
        "t_op",
    ];
    if !known.contains(&transform) {
        bail!("unknown transform {transform:?} (expected one of {known:?})");
    }
    let f = section.source.build(n)?;
    let op = section
        .operator
        .as_ref()
        .map(|spec| parse_operator(n, spec))
        .transpose()?;
    let need_op = |what: &str| -> Result<&DriftOperator> {
        op.as_ref()
            .with_context(|| format!("transform {what:?} needs an operator"))
    };
    let points: Vec<Point> = match (&section.points, &section.points_file) {
        (Some(list), None) => list.iter().map(|c| parse_point(n, c)).collect::<Result<_>>()?,
        (None, Some(path)) => read_points_file(n, path)?,
        (Some(_), Some(_)) => bail!("give either points or points_file, not both"),
        (None, None) => bail!("apply needs points or points_file"),
    };

    let is_max = transform == "horizontal_max";
    let mut headers = coord_headers("x", n);
    headers.extend(["value", "log10_abs", "sign"].map(String::from));
    if is_max {
        headers.push("argmax_t".to_string());
    }

    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let (v, argmax): (SignedLog, Option<f64>) = match transform {
                "riesz" => (riesz_apply_sl(need_op("riesz")?, &f, x, quad)?, None),
                "heat" => {
                    let t = section.t.context("transform \"heat\" needs t")?;
                    (heat_apply_sl(t, &f, x, quad)?, None)
                }
                "vertical_heat" => (
                    vertical_sq_sl(Semigroup::Heat, need_op("vertical_heat")?, &f, x, quad)?,
                    None,
                ),
                "vertical_poisson" => (
                    vertical_sq_sl(Semigroup::Poisson, need_op("vertical_poisson")?, &f, x, quad)?,
                    None,
                ),
                "horizontal_sq" => {
                    let k = section.k.context("transform \"horizontal_sq\" needs k")?;
                    (horizontal_sq_sl(Semigroup::Heat, k, &f, x, quad)?, None)
                }
                "horizontal_max" => {
                    let k = section.k.context("transform \"horizontal_max\" needs k")?;
                    let (v, t) = horizontal_max_sl(Semigroup::Heat, k, &f, x, quad)?;
                    (v, Some(t))
                }
                "v_kappa" => {
                    let kappa = section.kappa.context("transform \"v_kappa\" needs kappa")?;
                    (v_kappa_apply_sl(kappa, &f, x, quad)?, None)
                }
                "t_op" => (t_op_apply_sl(&f, x)?, None),
                _ => unreachable!(),
            };
            let mut row = x.coords();
            let [val, log10, sign, _] = value_columns(v, 0.0);
            row.extend([val, log10, sign]);
            if let Some(t) = argmax {
                row.push(t);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((headers, rows))
}

// ---------------------------------------------------------------------------
// levelset
// ---------------------------------------------------------------------------

fn levelset_rows(section: &config::LevelsetSection) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let n = section.n;
    let g = section.source.build(n)?;
    if section.rect_lo.len() != n || section.rect_hi.len() != n {
        bail!("rect_lo and rect_hi must each have {n} entries");
    }
    if section
        .rect_lo
        .iter()
        .zip(&section.rect_hi)
        .any(|(a, b)| !(a < b))
    {
        bail!("rect_lo must be strictly below rect_hi in every coordinate");
    }
    let region = Region::rect(section.rect_lo.clone(), section.rect_hi.clone());
    let lambdas: Vec<f64> = match (&section.lambdas, &section.lambda_range) {
        (Some(list), None) => list.clone(),
        (None, Some((lo, hi, m))) => {
            if !(lo > &0.0 && hi > lo && *m >= 2) {
                bail!("lambda_range needs 0 < lo < hi and at least 2 levels");
            }
            (0..*m)
                .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (*m - 1) as f64).exp())
                .collect()
        }
        _ => bail!("give exactly one of lambdas or lambda_range"),
    };
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        bail!("levels must be positive");
    }
    let grid = section.grid.unwrap_or(64);
    let op = |x: &Point| t_op_apply_sl(&g, x);
    let headers = ["lambda", "lambda_ln", "mu", "mu_ln", "lambda_mu_ln"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<f64>> = lambdas
        .par_iter()
        .map(|&lam| -> Result<Vec<f64>> {
            let mu_ln = level_set_measure_ln(&op, &region, lam.ln(), grid)?;
            Ok(vec![lam, lam.ln(), mu_ln.exp(), mu_ln, lam.ln() + mu_ln])
        })
        .collect::<Result<_>>()?;
    Ok((headers, rows))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn verify_stamp(args: &VerifyArgs, seed: u64) -> String {
    format!(
        "verify suites={:?} n={} k={:?} q={:?} op={:?} kappa={:?} trials={:?} samples={:?} etas={:?} tol={:?} seed={}",
        args.suites, args.n, args.k, args.q, args.op, args.kappa, args.trials, args.samples,
        args.etas, args.tol, seed
    )
}

fn parse_etas(spec: &Option<String>, default: &[f64]) -> Result<Vec<f64>> {
    match spec {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad slab height {tok:?}"))
            })
            .collect(),
    }
}

fn sanitize(name: &str) -> String {
    let mut out = String::new();
    let mut prev_us = false;
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            prev_us = false;
        } else if !prev_us && !out.is_empty() {
            out.push('_');
            prev_us = true;
        }
    }
    out.trim_end_matches('_').to_string()
}

fn run_suites(args: &VerifyArgs, quad: &QuadConfig, seed: u64) -> Result<Vec<SuiteOutcome>> {
    let n = args.n;
    let mut out = Vec::new();
    for name in &args.suites {
        match name.as_str() {
            "all" => {
                let cfg = VerifyConfig {
                    seed,
                    samples_per_leg: args.samples.unwrap_or(12),
                    samples_per_eta: 5,
                    quad: quad.clone(),
                };
                out.extend(run_all(&cfg)?);
            }
            "riesz_local" | "riesz_global" | "lp_local" | "lp_global" => {
                let suite = match name.as_str() {
                    "riesz_local" => RatioSuite::RieszLocal,
                    "riesz_global" => RatioSuite::RieszGlobal,
                    "lp_local" => RatioSuite::LpLocal,
                    _ => RatioSuite::LpGlobal,
                };
                let power = args.k.or(args.q).unwrap_or(1);
                let target = SuiteTarget::Operator(DriftOperator::dx_power(n, power));
                out.push(estimate_ratio_suite(
                    suite,
                    &target,
                    args.samples.unwrap_or(12),
                    quad,
                )?);
            }
            "time_sq" | "time_sup" | "poisson_time_sq" => {
                let suite = match name.as_str() {
                    "time_sq" => RatioSuite::HkKernel,
                    "time_sup" => RatioSuite::HkMax,
                    _ => RatioSuite::GkKernel,
                };
                let target = SuiteTarget::Time {
                    n,
                    k: args.k.unwrap_or(1),
                };
                out.push(estimate_ratio_suite(
                    suite,
                    &target,
                    args.samples.unwrap_or(12),
                    quad,
                )?);
            }
            "sharpness_riesz" | "sharpness_vertical_heat" | "sharpness_vertical_poisson" => {
                let (family, default_q) = match name.as_str() {
                    "sharpness_riesz" => (SharpnessFamily::Riesz, 3),
                    "sharpness_vertical_heat" => (SharpnessFamily::VerticalHeat, 2),
                    _ => (SharpnessFamily::VerticalPoisson, 2),
                };
                let op = DriftOperator::dx_power(n, args.q.unwrap_or(default_q));
                let etas = parse_etas(&args.etas, &[50.0, 100.0, 200.0])?;
                out.push(sharpness_suite(
                    family,
                    Some(&op),
                    n,
                    0,
                    &etas,
                    args.samples.unwrap_or(5),
                    quad,
                )?);
            }
            "sharpness_horizontal" => {
                let etas = parse_etas(&args.etas, &[100.0, 400.0])?;
                out.push(sharpness_suite(
                    SharpnessFamily::HorizontalSq,
                    None,
                    n,
                    args.k.unwrap_or(2),
                    &etas,
                    args.samples.unwrap_or(5),
                    quad,
                )?);
            }
            "sharpness_window" => {
                let etas = parse_etas(&args.etas, &[100.0, 400.0])?;
                out.push(lemzz_window_suite(
                    args.k.unwrap_or(2),
                    n,
                    &etas,
                    args.samples.unwrap_or(5),
                    0.1,
                )?);
            }
            "weak_type" => {
                let family = args
                    .op
                    .as_deref()
                    .context("weak_type needs --op (riesz, vertical_heat, vertical_poisson, horizontal_sq, horizontal_max)")?;
                let wt = match family {
                    "riesz" => WeakTypeOp::Riesz(DriftOperator::dx_power(
                        n,
                        args.q.context("weak_type --op riesz needs --q")?,
                    )),
                    "vertical_heat" => WeakTypeOp::VerticalHeat(DriftOperator::dx_power(
                        n,
                        args.q.context("weak_type --op vertical_heat needs --q")?,
                    )),
                    "vertical_poisson" => WeakTypeOp::VerticalPoisson(DriftOperator::dx_power(
                        n,
                        args.q.context("weak_type --op vertical_poisson needs --q")?,
                    )),
                    "horizontal_sq" => WeakTypeOp::HorizontalSq {
                        n,
                        k: args.k.context("weak_type --op horizontal_sq needs --k")?,
                    },
                    "horizontal_max" => WeakTypeOp::HorizontalMax {
                        n,
                        k: args.k.context("weak_type --op horizontal_max needs --k")?,
                    },
                    other => bail!("unknown weak_type family {other:?}"),
                };
                let etas = parse_etas(&args.etas, &[50.0, 75.0, 100.0, 150.0, 200.0])?;
                let bounded = wt.target_exponent() <= 0.0;
                out.push(weak_type_outcome(
                    &wt,
                    &etas,
                    args.samples.unwrap_or(5),
                    args.tol.unwrap_or(GROWTH_TOLERANCE),
                    bounded,
                    quad,
                )?);
            }
            "orlicz" => {
                let kappas: Vec<f64> = match args.kappa {
                    Some(k) => vec![k],
                    None => vec![3.0, 4.0, 6.0],
                };
                for kappa in kappas {
                    out.push(scalar_orlicz_inequality_test(
                        kappa,
                        args.trials.unwrap_or(100_000),
                        seed,
                    )?);
                }
            }
            other => bail!("unknown suite {other:?}"),
        }
    }
    Ok(out)
}

fn cmd_verify(
    args: &VerifyArgs,
    quad: &QuadConfig,
    out: &Path,
    cfg_hash: &str,
    seed: u64,
) -> Result<bool> {
    let outcomes = run_suites(args, quad, seed)?;
    let mut report = String::new();
    writeln!(report, "# driftlab verification report\n").unwrap();
    writeln!(report, "- config_hash: {cfg_hash}").unwrap();
    writeln!(report, "- seed: {seed}\n").unwrap();
    writeln!(report, "| suite | verdict |").unwrap();
    writeln!(report, "|---|---|").unwrap();
    for o in &outcomes {
        writeln!(
            report,
            "| {} | {} |",
            o.name,
            if o.pass { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    for o in &outcomes {
        let file = format!("verify_{}.csv", sanitize(&o.name));
        write_csv(&out.join(&file), cfg_hash, seed, &o.table.headers, &o.table.rows)?;
        writeln!(report, "\n## {}\n", o.name).unwrap();
        writeln!(report, "- claim: {}", o.claim).unwrap();
        writeln!(report, "- result: {}", o.summary).unwrap();
        writeln!(report, "- data: {file}").unwrap();
        println!("[{}] {}", if o.pass { "pass" } else { "FAIL" }, o.summary);
    }
    fs::write(out.join("report.md"), report).context("cannot write report.md")?;
    Ok(outcomes.iter().all(|o| o.pass))
}
