//! Special functions: Hermite polynomials, Laurent polynomials in one
//! variable, multi-indices, and the Laplace-type transform
//!
//! ```text
//! B_ν(a) = ∫₀^∞ t^ν e^{-t} e^{-a²/(4t)} dt/t,    a > 0.
//! ```
//!
//! `B_ν` is the radial building block of every fractional-power and Riesz
//! kernel in this crate: spatial derivatives of the heat kernel expand into
//! Hermite polynomials, and each monomial contributes one `B_ν` after the
//! time integral. For large `a` the integrand is a sharp Laplace peak at
//! `t = a/2` of width `~a^{3/4}`, and
//!
//! ```text
//! B_ν(a) = √(2π) 2^{-ν} a^{ν-1/2} e^{-a} (1 + O(1/a)).
//! ```

use crate::quadrature::{self, QuadConfig};
use crate::{Error, Result};

/// A multi-index `α = (α₁, …, α_n)` of partial derivative orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The `x₁` component, the one the drift direction singles out.
    pub fn first(&self) -> usize {
        self.0[0]
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Physicists' Hermite polynomial `H_j(s)` by the three-term recurrence
/// `H_{j+1} = 2s H_j - 2j H_{j-1}`.
pub fn hermite(j: usize, s: f64) -> f64 {
    let mut h0 = 1.0;
    if j == 0 {
        return h0;
    }
    let mut h1 = 2.0 * s;
    for m in 1..j {
        let h2 = 2.0 * s * h1 - 2.0 * (m as f64) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Coefficients of `H_j` in the power basis: entry `i` multiplies `s^i`.
/// Exact in `f64` for the orders used here (the recurrence only needs
/// integer arithmetic well below 2^53).
pub fn hermite_coeffs(j: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if j == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for m in 1..j {
        let mut next = vec![0.0; m + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= 2.0 * (m as f64) * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Product Hermite polynomial `H_α(z) = Π_i H_{α_i}(z_i)`.
pub fn hermite_multi(alpha: &MultiIndex, z: &[f64]) -> f64 {
    assert_eq!(alpha.dim(), z.len(), "multi-index and point dimension differ");
    alpha
        .0
        .iter()
        .zip(z)
        .map(|(&j, &zi)| hermite(j, zi))
        .product()
}

/// `Γ(m/2)` for integer `m ≥ 1`, by the functional equation from `Γ(1/2)`
/// and `Γ(1)`.
pub fn gamma_half(m: usize) -> f64 {
    assert!(m >= 1);
    let mut s;
    let mut v;
    if m % 2 == 1 {
        s = 0.5;
        v = std::f64::consts::PI.sqrt();
    } else {
        s = 1.0;
        v = 1.0;
    }
    while s + 0.5 < m as f64 / 2.0 + 0.25 {
        v *= s;
        s += 1.0;
    }
    v
}

/// Volume of the unit ball in ℝ^d (`d = 0` gives 1, the convention that
/// makes slab cross-sections work in one dimension).
pub fn unit_ball_volume(d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d + 2)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

// ---------------------------------------------------------------------------
// Laurent polynomials
// ---------------------------------------------------------------------------

/// A finite sum `Σ c_e t^e` with distinct real exponents `e` (integers and
/// half-integers in practice). Closed under addition, multiplication and the
/// formal `t`-derivative, which is all the heat-kernel time derivatives need.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    /// `(exponent, coefficient)` sorted by exponent, zero coefficients dropped.
    terms: Vec<(f64, f64)>,
}

impl LaurentPoly {
    pub fn new(mut terms: Vec<(f64, f64)>) -> Self {
        terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if (last.0 - e).abs() < 1e-12 => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        LaurentPoly { terms: merged }
    }

    pub fn zero() -> Self {
        LaurentPoly { terms: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(0.0, c)])
    }

    pub fn monomial(coeff: f64, exponent: f64) -> Self {
        Self::new(vec![(exponent, coeff)])
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let ln_t = t.ln();
        self.terms
            .iter()
            .map(|&(e, c)| c * (e * ln_t).exp())
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::new(terms)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.terms.iter().map(|&(e, co)| (e, co * c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(e1, c1) in &self.terms {
            for &(e2, c2) in &other.terms {
                terms.push((e1 + e2, c1 * c2));
            }
        }
        Self::new(terms)
    }

    /// Formal derivative `d/dt`.
    pub fn dt(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|&&(e, _)| e != 0.0)
                .map(|&(e, c)| (e - 1.0, c * e))
                .collect(),
        )
    }

    /// Multiply by `t^d`.
    pub fn shift(&self, d: f64) -> Self {
        Self::new(self.terms.iter().map(|&(e, c)| (e + d, c)).collect())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.add(&other.scale(-1.0))
            .terms
            .iter()
            .all(|&(_, c)| c.abs() <= tol)
    }
}

// ---------------------------------------------------------------------------
// The transform B_ν
// ---------------------------------------------------------------------------

/// Evaluation strategy for [`b_nu`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BnuMode {
    /// Quadrature below [`A_SWITCH`], leading-order asymptotics above.
    Auto,
    /// Adaptive quadrature on the log axis; relative accuracy near the
    /// integrator tolerance everywhere.
    Quadrature,
    /// Leading Laplace term `√(2π) 2^{-ν} a^{ν-1/2} e^{-a}`; relative error
    /// `O(1/a)`.
    Asymptotic,
}

/// Crossover for [`BnuMode::Auto`]: above this the leading asymptotic term is
/// within a few percent, which is all the two-sided ratio experiments need,
/// and the sharp Laplace peak makes quadrature increasingly pointless.
pub const A_SWITCH: f64 = 30.0;

fn bnu_quad_config() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-11,
        ..QuadConfig::default()
    }
}

/// Exponent of the shifted integrand: `ν ln t - (√t - a/(2√t))²`, which is
/// `ν ln t - t - a²/(4t) + a` grouped so the Laplace peak evaluates without
/// cancellation. Always finite for `t > 0`.
fn bnu_exponent(nu: f64, a: f64, t: f64) -> f64 {
    let rt = t.sqrt();
    let w = rt - a / (2.0 * rt);
    nu * t.ln() - w * w
}

fn ln_asymptotic(nu: f64, a: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI).ln() - nu * 2f64.ln() + (nu - 0.5) * a.ln() - a
}

/// `ln B_ν(a)` (the value itself is positive). Prefer this to [`b_nu`] when
/// `a` is large enough that `e^{-a}` underflows.
pub fn b_nu_ln(nu: f64, a: f64, mode: BnuMode) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!(
            "b_nu requires finite a > 0, got {a}"
        )));
    }
    match mode {
        BnuMode::Asymptotic => Ok(ln_asymptotic(nu, a)),
        BnuMode::Auto => {
            if a > A_SWITCH {
                Ok(ln_asymptotic(nu, a))
            } else {
                b_nu_ln(nu, a, BnuMode::Quadrature)
            }
        }
        BnuMode::Quadrature => {
            let ell = a.powf(0.75);
            let mut seeds = vec![a * a / 4.0, a / 2.0, 1.0, nu.abs() + 1.0];
            if a / 2.0 - ell > 0.0 {
                seeds.push(a / 2.0 - ell);
            }
            seeds.push(a / 2.0 + ell);
            let r = quadrature::halfline_with_seeds(
                &|t| (bnu_exponent(nu, a, t) - t.ln()).exp(),
                &seeds,
                &bnu_quad_config(),
            )?;
            if r.value <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "b_nu quadrature produced nonpositive value {} at nu={nu} a={a}",
                    r.value
                )));
            }
            Ok(r.value.ln() - a)
        }
    }
}

/// `B_ν(a) = ∫₀^∞ t^ν e^{-t-a²/(4t)} dt/t`. Underflows to `0.0` for
/// `a ≳ 700`; use [`b_nu_ln`] there.
pub fn b_nu(nu: f64, a: f64, mode: BnuMode) -> Result<f64> {
    Ok(b_nu_ln(nu, a, mode)?.exp())
}

/// The same integral restricted to the Laplace window
/// `((a/2 - ℓ) ∨ 0, a/2 + ℓ)`. Requires `ℓ ≥ a^{3/4}`, the width below which
/// the window no longer captures the peak; `ℓ = ∞` recovers [`b_nu`].
pub fn b_nu_truncated(nu: f64, a: f64, ell: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!(
            "b_nu_truncated requires finite a > 0, got {a}"
        )));
    }
    if !(ell >= a.powf(0.75)) {
        return Err(Error::InvalidInput(format!(
            "window half-width {ell} below a^(3/4) = {}",
            a.powf(0.75)
        )));
    }
    let lo = (a / 2.0 - ell).max(0.0);
    let hi = a / 2.0 + ell;
    let f = |t: f64| (bnu_exponent(nu, a, t) - t.ln()).exp();
    let r = if hi.is_finite() {
        quadrature::halfline_on_window(&f, lo, hi, &[a / 2.0], &bnu_quad_config())?
    } else {
        quadrature::halfline_with_seeds(
            &f,
            &[a * a / 4.0, a / 2.0, 1.0, nu.abs() + 1.0],
            &bnu_quad_config(),
        )?
    };
    Ok(r.value * (-a).exp())
}

/// `∫₀^∞ Q(t) e^{-t} e^{-a²/(4t)} dt/t` for a Laurent polynomial `Q`,
/// evaluated termwise through [`b_nu`].
pub fn laplace_power_integral(q: &LaurentPoly, a: f64, mode: BnuMode) -> Result<f64> {
    let mut acc = 0.0;
    for &(e, c) in q.terms() {
        acc += c * b_nu(e, a, mode)?;
    }
    Ok(acc)
}

/// Leading Laplace asymptotics of the same integral:
/// `√(2π) Q(a/2) a^{-1/2} e^{-a}`.
pub fn laplace_power_asymptotic(q: &LaurentPoly, a: f64) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt() * q.eval(a / 2.0) / a.sqrt() * (-a).exp()
}
