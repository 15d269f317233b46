//! The heat kernel of the drift Laplacian and its derivatives.
//!
//! Two derivative families are needed downstream. Time derivatives take the
//! form `∂_t^k p_t = q_k(|x-y|², t) · p_t` where `q_k` is polynomial in
//! `u = |x-y|²` with Laurent-polynomial coefficients in `t`; the `q_k` are
//! built once per `(k, n)` by the recurrence `q_{k+1} = ∂_t q_k + q_k q_1`
//! and cached. Space derivatives reduce to Hermite polynomials of the
//! rescaled offsets `(x_i - y_i)/(2√t)` via the product rule on
//! `e^{-x₁} e^{-|x-y|²/4t}`.
//!
//! All evaluation goes through the log of the kernel; the polynomial
//! prefactors are moderate numbers and only the final product can be far
//! outside `f64` range.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::logspace::SignedLog;
use crate::quadrature::SpatialHint;
use crate::space::Point;
use crate::specfun::{binomial, hermite, LaurentPoly, MultiIndex};

/// `ln p_t(x, y)`; the kernel is strictly positive.
pub fn log_heat_kernel(t: f64, x: &Point, y: &Point) -> f64 {
    debug_assert!(t > 0.0);
    debug_assert_eq!(x.dim(), y.dim());
    let n = x.dim() as f64;
    -0.5 * n * (4.0 * std::f64::consts::PI * t).ln() - x.x1 - y.x1 - t
        - x.dist_sq(y) / (4.0 * t)
}

/// `p_t(x, y)` as a plain number.
pub fn heat_kernel(t: f64, x: &Point, y: &Point) -> f64 {
    log_heat_kernel(t, x, y).exp()
}

/// `p_t(x, y)` in signed log form.
pub fn heat_sl(t: f64, x: &Point, y: &Point) -> SignedLog {
    SignedLog::new(1, log_heat_kernel(t, x, y))
}

/// Where `e^{2y₁} p_t(x, ·)` concentrates: a Gaussian of standard deviation
/// `√(2t)` centered at `x + 2t·e₁`. Used as an integration hint.
pub fn heat_hint(t: f64, x: &Point) -> SpatialHint {
    let mut center = x.coords();
    center[0] += 2.0 * t;
    SpatialHint {
        center,
        width: (4.0 * t).sqrt(),
    }
}

/// Coefficients of `q_k` as polynomials in `u = |x-y|²`: entry `j` is the
/// Laurent polynomial in `t` multiplying `u^j`.
type QkPoly = Vec<LaurentPoly>;

static QK_CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<QkPoly>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn qk_multiply_q1(q: &QkPoly, n: usize) -> QkPoly {
    // q1 = u/(4t²) - 1 - n/(2t)
    let up = LaurentPoly::monomial(0.25, -2.0);
    let zero_part =
        LaurentPoly::constant(-1.0).add(&LaurentPoly::monomial(-(n as f64) / 2.0, -1.0));
    let mut out = vec![LaurentPoly::zero(); q.len() + 1];
    for (j, c) in q.iter().enumerate() {
        out[j + 1] = out[j + 1].add(&c.mul(&up));
        out[j] = out[j].add(&c.mul(&zero_part));
    }
    out
}

/// `q_k` for `∂_t^k p_t = q_k(u, t) p_t`, cached per `(k, n)`.
pub fn qk_poly(k: usize, n: usize) -> Arc<QkPoly> {
    let mut cache = QK_CACHE.lock().unwrap();
    if let Some(q) = cache.get(&(k, n)) {
        return Arc::clone(q);
    }
    // build from the largest cached predecessor
    let mut have: Vec<(usize, Arc<QkPoly>)> = cache
        .iter()
        .filter(|((kk, nn), _)| *nn == n && *kk < k)
        .map(|((kk, _), v)| (*kk, Arc::clone(v)))
        .collect();
    have.sort_by_key(|(kk, _)| *kk);
    let (mut kk, mut q): (usize, QkPoly) = match have.last() {
        Some((kk, v)) => (*kk, (**v).clone()),
        None => (0, vec![LaurentPoly::constant(1.0)]),
    };
    while kk < k {
        let mut next = qk_multiply_q1(&q, n);
        for (j, c) in q.iter().enumerate() {
            next[j] = next[j].add(&c.dt());
        }
        q = next;
        kk += 1;
        cache.insert((kk, n), Arc::new(q.clone()));
    }
    Arc::clone(cache.get(&(k, n)).unwrap())
}

/// `∂_t^k p_t(x, y)` in signed log form.
pub fn heat_dt_sl(k: usize, t: f64, x: &Point, y: &Point) -> SignedLog {
    let q = qk_poly(k, x.dim());
    let u = x.dist_sq(y);
    // Horner in u; the coefficients q_j(t) are moderate when t ~ u/4t ~ O(1)
    let mut poly = 0.0;
    for c in q.iter().rev() {
        poly = poly * u + c.eval(t);
    }
    SignedLog::from_f64(poly).scale_ln(log_heat_kernel(t, x, y))
}

/// `∂_t^k p_t(x, y)` as a plain number.
pub fn heat_dt(k: usize, t: f64, x: &Point, y: &Point) -> f64 {
    heat_dt_sl(k, t, x, y).to_f64()
}

/// The polynomial factor `∂_x^α p_t / p_t`, a plain number.
///
/// With `s_i = (x_i - y_i)/(2√t)`:
/// the drift coordinate contributes `Σ_m C(α₁,m) (-1)^{α₁-m} (-1/(2√t))^m H_m(s₁)`
/// (the product rule on `e^{-x₁}·e^{-s₁²}`), each transverse coordinate
/// contributes `(-1/(2√t))^{α_i} H_{α_i}(s_i)`.
pub fn heat_dx_factor(alpha: &MultiIndex, t: f64, x: &Point, y: &Point) -> f64 {
    debug_assert_eq!(alpha.dim(), x.dim());
    let rt2 = 2.0 * t.sqrt();
    let s1 = (x.x1 - y.x1) / rt2;
    let a1 = alpha.0[0];
    let mut drift = 0.0;
    for m in 0..=a1 {
        let sign = if (a1 - m) % 2 == 0 { 1.0 } else { -1.0 };
        drift += binomial(a1, m) * sign * (-1.0 / rt2).powi(m as i32) * hermite(m, s1);
    }
    let mut trans = 1.0;
    for (ai, (xi, yi)) in alpha.0[1..].iter().zip(x.xp.iter().zip(&y.xp)) {
        let s = (xi - yi) / rt2;
        trans *= (-1.0 / rt2).powi(*ai as i32) * hermite(*ai, s);
    }
    drift * trans
}

/// `∂_x^α p_t(x, y)` in signed log form.
pub fn heat_dx_sl(alpha: &MultiIndex, t: f64, x: &Point, y: &Point) -> SignedLog {
    SignedLog::from_f64(heat_dx_factor(alpha, t, x, y)).scale_ln(log_heat_kernel(t, x, y))
}

/// `∂_x^α p_t(x, y)` as a plain number.
pub fn heat_dx(alpha: &MultiIndex, t: f64, x: &Point, y: &Point) -> f64 {
    heat_dx_sl(alpha, t, x, y).to_f64()
}

/// `∂_{y_j} ∂_x^α p_t(x, y)` (coordinates are 0-based; `j = 0` is the drift
/// axis), via the identity `∂_{y_j} F = -2δ_{j,0} F - ∂_{x_j} F` valid for
/// every `F = c(t) e^{-x₁-y₁} G(x-y)`.
pub fn heat_dx_grad_y_sl(alpha: &MultiIndex, j: usize, t: f64, x: &Point, y: &Point) -> SignedLog {
    let mut bumped = alpha.clone();
    bumped.0[j] += 1;
    let main = heat_dx_sl(&bumped, t, x, y).neg();
    if j == 0 {
        crate::logspace::signed_log_sum(&[main, heat_dx_sl(alpha, t, x, y).scale(-2.0)])
    } else {
        main
    }
}
