//! Constant-coefficient differential operators `D = Σ_α a_α ∂^α`.
//!
//! All operators here are homogeneous: every multi-index has the same order
//! `q`, which is what the `t^{q/2}` scaling in the singular-integral kernels
//! and the far-field growth laws key on.

use serde::{Deserialize, Serialize};

use crate::logspace::{signed_log_sum, SignedLog};
use crate::space::Point;
use crate::specfun::MultiIndex;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftOperator {
    n: usize,
    terms: Vec<(f64, MultiIndex)>,
    order: usize,
}

impl DriftOperator {
    pub fn new(n: usize, terms: Vec<(f64, MultiIndex)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("operator needs at least one term".into()));
        }
        let order = terms[0].1.order();
        if order == 0 {
            return Err(Error::InvalidInput("operator order must be at least 1".into()));
        }
        for (a, alpha) in &terms {
            if !a.is_finite() || *a == 0.0 {
                return Err(Error::InvalidInput(format!("bad coefficient {a}")));
            }
            if alpha.dim() != n {
                return Err(Error::InvalidInput(format!(
                    "multi-index {alpha} has dimension {} in an operator on {n} coordinates",
                    alpha.dim()
                )));
            }
            if alpha.order() != order {
                return Err(Error::InvalidInput(format!(
                    "mixed orders {order} and {} in one operator",
                    alpha.order()
                )));
            }
        }
        Ok(DriftOperator { n, terms, order })
    }

    /// The single term `a ∂^α`.
    pub fn single(a: f64, alpha: MultiIndex) -> Result<Self> {
        let n = alpha.dim();
        Self::new(n, vec![(a, alpha)])
    }

    /// `∂₁^k` on `ℝⁿ`.
    pub fn dx_power(n: usize, k: usize) -> Self {
        let mut idx = vec![0usize; n];
        idx[0] = k;
        Self::new(n, vec![(1.0, MultiIndex(idx))]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Largest number of drift-direction derivatives in any term. This, not
    /// the total order, is what the far-field exponents run on.
    pub fn drift_order(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, alpha)| alpha.first())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> &[(f64, MultiIndex)] {
        &self.terms
    }

    /// `D_x p_t(x, y)` in signed log form.
    pub fn apply_heat_sl(&self, t: f64, x: &Point, y: &Point) -> SignedLog {
        let parts: Vec<SignedLog> = self
            .terms
            .iter()
            .map(|(a, alpha)| crate::kernels::heat::heat_dx_sl(alpha, t, x, y).scale(*a))
            .collect();
        signed_log_sum(&parts)
    }

    /// `∂_{y_j} D_x p_t(x, y)` in signed log form.
    pub fn apply_heat_grad_y_sl(&self, j: usize, t: f64, x: &Point, y: &Point) -> SignedLog {
        let parts: Vec<SignedLog> = self
            .terms
            .iter()
            .map(|(a, alpha)| {
                crate::kernels::heat::heat_dx_grad_y_sl(alpha, j, t, x, y).scale(*a)
            })
            .collect();
        signed_log_sum(&parts)
    }

    /// Human-readable form like `d1^3` or `2 d1^1 d2^1`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (a, alpha) in &self.terms {
            let mut s = String::new();
            if (*a - 1.0).abs() > 1e-15 {
                s.push_str(&format!("{a} "));
            }
            for (i, &e) in alpha.0.iter().enumerate() {
                if e > 0 {
                    s.push_str(&format!("d{}^{} ", i + 1, e));
                }
            }
            parts.push(s.trim_end().to_string());
        }
        parts.join(" + ")
    }
}

/// Result of scanning the transverse profile of a Riesz-type kernel on the
/// far slab `x₁ = η`: where (in units of `√η`) the rescaled kernel peaks,
/// how wide the half-height plateau around the peak is, and the peak value.
#[derive(Clone, Debug)]
pub struct ScanBall {
    /// Peak location in `z' = x'/√η` coordinates (empty when `n = 1`).
    pub cross_center: Vec<f64>,
    /// Half-height radius in the same units.
    pub cross_radius: f64,
    /// `ln` of the rescaled kernel at the peak.
    pub peak_ln: f64,
    /// Sign of `(-1)^q R_D` at the peak.
    pub sign: i8,
}

const SCAN_HALF_WIDTH: f64 = 3.0;
const SCAN_POINTS: usize = 41;

/// Scan `z' ↦ (-1)^q R_D((η, z'·√η), 0) · e^{x₁+|x|} |x|^{-(q-n-1)/2}` over
/// the grid `z' ∈ [-3, 3]^{n-1}` and locate the peak and its half-height
/// ball. This is how the far-slab regions for operators with transverse
/// structure get their cross-sections.
pub fn transverse_profile_scan(op: &DriftOperator, eta: f64) -> Result<ScanBall> {
    let n = op.dim();
    let q = op.order();
    let origin = Point::new(0.0, vec![0.0; n - 1]);
    let flip = if q % 2 == 0 { 1.0 } else { -1.0 };
    let rho = |zp: &[f64]| -> Result<SignedLog> {
        let s = eta.sqrt();
        let x = Point::new(eta, zp.iter().map(|z| z * s).collect());
        let norm = x.x1 + x.dist(&origin)
            - 0.5 * (q as f64 - n as f64 - 1.0) * x.dist(&origin).ln();
        Ok(crate::kernels::riesz::riesz_kernel_sl(op, &x, &origin)?
            .scale(flip)
            .scale_ln(norm))
    };
    if n == 1 {
        let v = rho(&[])?;
        if v.is_zero() {
            return Err(Error::AllNearZero { threshold: 0.0 });
        }
        return Ok(ScanBall {
            cross_center: vec![],
            cross_radius: 0.0,
            peak_ln: v.ln_abs,
            sign: v.sign,
        });
    }
    // tensor grid over [-3, 3]^{n-1}
    let m = n - 1;
    let coord = |i: usize| -> f64 {
        -SCAN_HALF_WIDTH + 2.0 * SCAN_HALF_WIDTH * i as f64 / (SCAN_POINTS - 1) as f64
    };
    let total = SCAN_POINTS.pow(m as u32);
    let mut values: Vec<SignedLog> = Vec::with_capacity(total);
    let unpack = |flat: usize| -> Vec<usize> {
        let mut idx = vec![0usize; m];
        let mut rest = flat;
        for slot in idx.iter_mut() {
            *slot = rest % SCAN_POINTS;
            rest /= SCAN_POINTS;
        }
        idx
    };
    for flat in 0..total {
        let zp: Vec<f64> = unpack(flat).iter().map(|&i| coord(i)).collect();
        values.push(rho(&zp)?);
    }
    // peak of |rho| with positive part preferred
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.sign == 0 {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) => {
                if v.ln_abs > values[b].ln_abs {
                    best = Some(i);
                }
            }
        }
    }
    let best = best.ok_or(Error::AllNearZero { threshold: 0.0 })?;
    let peak = values[best];
    let best_idx = unpack(best);
    // walk outward axis by axis until the profile drops below half height
    // or changes sign
    let step = 2.0 * SCAN_HALF_WIDTH / (SCAN_POINTS - 1) as f64;
    let half = peak.ln_abs - std::f64::consts::LN_2;
    let mut radius = SCAN_HALF_WIDTH;
    for axis in 0..m {
        for dir in [-1i64, 1] {
            let mut steps = 0i64;
            loop {
                let next = best_idx[axis] as i64 + (steps + 1) * dir;
                if next < 0 || next >= SCAN_POINTS as i64 {
                    break;
                }
                let mut idx = best_idx.clone();
                idx[axis] = next as usize;
                let flat: usize = idx
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &i| acc * SCAN_POINTS + i);
                let v = values[flat];
                if v.sign != peak.sign || v.ln_abs < half {
                    break;
                }
                steps += 1;
            }
            radius = radius.min((steps.max(1)) as f64 * step);
        }
    }
    Ok(ScanBall {
        cross_center: best_idx.iter().map(|&i| coord(i)).collect(),
        cross_radius: radius,
        peak_ln: peak.ln_abs,
        sign: peak.sign,
    })
}
