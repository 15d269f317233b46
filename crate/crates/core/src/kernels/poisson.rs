//! The Poisson kernel by subordination, with time and space derivatives.
//!
//! With `φ(s) = s e^{-s²}/√π` (so `∫₀^∞ φ(t/(2√u)) du/u = 1` for every
//! `t > 0`),
//!
//! ```text
//! P_t(x, y) = ∫₀^∞ φ(t/(2√u)) p_u(x, y) du/u.
//! ```
//!
//! Time derivatives fall on `φ`:
//! `∂_t^k P_t = ∫ (2√u)^{-k} φ^{(k)}(t/(2√u)) p_u du/u` with
//! `φ^{(k)}(s) = (1/√π) e^{-s²} [(-1)^k s H_k(s) + k(-1)^{k-1} H_{k-1}(s)]`;
//! space derivatives fall on `p_u`. The combined exponential in `u` is
//! `e^{-u-(|x-y|²+t²)/(4u)}`, so every integral here is seeded at the
//! Laplace point `u* = √(t²+|x-y|²)/2`.

use crate::diffop::DriftOperator;
use crate::logspace::SignedLog;
use crate::quadrature::{halfline_signed_log, QuadConfig};
use crate::space::Point;
use crate::specfun::hermite;
use crate::{Error, Result};

/// The `k`-th derivative of `φ(s) = s e^{-s²}/√π`.
pub fn phi_k(k: usize, s: f64) -> f64 {
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = if k == 0 {
        s
    } else {
        sign_k * s * hermite(k, s) + k as f64 * (-sign_k) * hermite(k - 1, s)
    };
    bracket * (-s * s).exp() / std::f64::consts::PI.sqrt()
}

/// Sign and log magnitude of `φ^{(k)}(s)`, finite for any `s ≥ 0`.
fn phi_k_sl(k: usize, s: f64) -> SignedLog {
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = if k == 0 {
        s
    } else {
        sign_k * s * hermite(k, s) + k as f64 * (-sign_k) * hermite(k - 1, s)
    };
    SignedLog::from_f64(bracket)
        .scale_ln(-s * s - 0.5 * std::f64::consts::PI.ln())
}

fn subordination_seeds(t: f64, d: f64) -> Vec<f64> {
    let ustar = (t * t + d * d).sqrt() / 2.0;
    let ell = (2.0 * ustar).powf(0.75);
    vec![
        ustar,
        ustar - ell,
        ustar + ell,
        t * t / 4.0,
        d / 2.0,
        1.0,
    ]
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `P_t(x, y)` in signed log form.
pub fn poisson_sl(t: f64, x: &Point, y: &Point) -> Result<SignedLog> {
    check_time(t)?;
    let d = x.dist(y);
    let (v, _ln_err) = halfline_signed_log(
        &|u: f64| {
            let s = t / (2.0 * u.sqrt());
            phi_k_sl(0, s)
                .scale_ln(crate::kernels::heat::log_heat_kernel(u, x, y) - u.ln())
        },
        &subordination_seeds(t, d),
        &QuadConfig::default(),
    )?;
    Ok(v)
}

/// `P_t(x, y)` as a plain number.
pub fn poisson_kernel(t: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(poisson_sl(t, x, y)?.to_f64())
}

/// `∂_t^k P_t(x, y)` in signed log form.
pub fn poisson_dt_sl(k: usize, t: f64, x: &Point, y: &Point) -> Result<SignedLog> {
    check_time(t)?;
    let d = x.dist(y);
    let (v, _ln_err) = halfline_signed_log(
        &|u: f64| {
            let ru2 = 2.0 * u.sqrt();
            let s = t / ru2;
            phi_k_sl(k, s).scale_ln(
                crate::kernels::heat::log_heat_kernel(u, x, y)
                    - u.ln()
                    - k as f64 * ru2.ln(),
            )
        },
        &subordination_seeds(t, d),
        &QuadConfig::default(),
    )?;
    Ok(v)
}

/// `D_x P_t(x, y)` in signed log form, for a homogeneous operator `D`.
pub fn poisson_op_sl(op: &DriftOperator, t: f64, x: &Point, y: &Point) -> Result<SignedLog> {
    check_time(t)?;
    let d = x.dist(y);
    let (v, _ln_err) = halfline_signed_log(
        &|u: f64| {
            let s = t / (2.0 * u.sqrt());
            op.apply_heat_sl(u, x, y)
                .mul(phi_k_sl(0, s))
                .scale_ln(-u.ln())
        },
        &subordination_seeds(t, d),
        &QuadConfig::default(),
    )?;
    Ok(v)
}
