//! Explicit kernels for the drift Laplacian `Δ + 2∂₁` on `ℝⁿ`.
//!
//! The semigroup generated by `-L = Δ + 2∂₁` (symmetric with respect to
//! `dμ = e^{2y₁} dy`) has the closed-form kernel
//!
//! ```text
//! p_t(x, y) = (4πt)^{-n/2} e^{-x₁-y₁} e^{-t} e^{-|x-y|²/(4t)},
//! ```
//!
//! with respect to Lebesgue measure in `y`. Everything in this module tree
//! is a function of this formula: time and space derivatives of `p_t`
//! ([`heat`]), the subordinated Poisson kernel and its derivatives
//! ([`poisson`]), and the operator kernels obtained by integrating powers of
//! `t` against derivative kernels ([`riesz`]).
//!
//! Values routinely live at scales like `e^{-1600}`, so each kernel has a
//! signed log-domain variant; the plain `f64` versions are conveniences for
//! moderate arguments.

pub mod heat;
pub mod poisson;
pub mod riesz;

use crate::logspace::SignedLog;
use crate::space::Point;

/// Model kernel with the same far-field anatomy as the operator kernels:
/// a weight `e^{-2x₁}`, a power of the distance, a transverse Gaussian of
/// width `√|x-y|`, and a cut to the forward region `x₁ - y₁ > 1`:
///
/// ```text
/// V_κ(x, y) = e^{-2x₁} |x-y|^{(κ-n-1)/2} e^{-|x'-y'|²/(4|x-y|)} 1{x₁-y₁ > 1}.
/// ```
pub fn v_kappa_sl(kappa: f64, x: &Point, y: &Point) -> SignedLog {
    if x.x1 - y.x1 <= 1.0 {
        return SignedLog::ZERO;
    }
    let n = x.dim() as f64;
    let d = x.dist(y);
    let ln = -2.0 * x.x1 + 0.5 * (kappa - n - 1.0) * d.ln() - x.xp_dist_sq(y) / (4.0 * d);
    SignedLog::new(1, ln)
}

/// [`v_kappa_sl`] as a plain number.
pub fn v_kappa(kappa: f64, x: &Point, y: &Point) -> f64 {
    v_kappa_sl(kappa, x, y).to_f64()
}
