//! Signed log-domain scalars.
//!
//! Kernel values in this crate routinely live at scales like `e^{-1600}`,
//! far below the smallest positive `f64`. Every kernel therefore has an
//! evaluation path that returns a [`SignedLog`]: the natural logarithm of the
//! absolute value together with a sign. Sums of such values are formed with
//! the usual shift-by-maximum trick.

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Zero is encoded as `sign == 0` with `ln_abs == -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { ln_abs, sign }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                ln_abs: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// Back to `f64`. Underflows to `0.0` and overflows to `±inf` silently;
    /// callers who care about extreme scales should stay in log space.
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        SignedLog::new(self.sign.abs(), self.ln_abs)
    }

    pub fn neg(self) -> Self {
        SignedLog::new(-self.sign, self.ln_abs)
    }

    pub fn mul(self, other: Self) -> Self {
        SignedLog::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    /// Multiply by `exp(dln)` without leaving log space.
    pub fn scale_ln(self, dln: f64) -> Self {
        SignedLog::new(self.sign, self.ln_abs + dln)
    }

    /// Multiply by an ordinary float.
    pub fn scale(self, c: f64) -> Self {
        self.mul(SignedLog::from_f64(c))
    }

    pub fn square(self) -> Self {
        SignedLog::new(self.sign * self.sign, 2.0 * self.ln_abs)
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self) -> Self {
        debug_assert!(self.sign >= 0);
        SignedLog::new(self.sign, 0.5 * self.ln_abs)
    }

    /// `ln(self/other)` for two nonzero values of equal sign.
    pub fn ln_ratio(self, other: Self) -> f64 {
        self.ln_abs - other.ln_abs
    }
}

/// Sum a slice of signed log-domain values.
///
/// Two passes: find the maximal magnitude, then accumulate `sign*exp(ln-max)`
/// in slice order. Deterministic for a fixed input order.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    let mut max_ln = f64::NEG_INFINITY;
    for t in terms {
        if t.sign != 0 && t.ln_abs > max_ln {
            max_ln = t.ln_abs;
        }
    }
    if max_ln == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let mut acc = 0.0f64;
    for t in terms {
        if t.sign != 0 {
            acc += t.sign as f64 * (t.ln_abs - max_ln).exp();
        }
    }
    if acc == 0.0 {
        return SignedLog::ZERO;
    }
    SignedLog::new(if acc > 0.0 { 1 } else { -1 }, acc.abs().ln() + max_ln)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roundtrip_and_ops() {
        let a = SignedLog::from_f64(-3.25);
        let b = SignedLog::from_f64(0.5);
        assert_eq!(a.to_f64(), -3.25);
        let prod = a.mul(b).to_f64();
        assert!((prod - -1.625).abs() < 1e-15 * 1.625, "{prod}");
        assert_eq!(a.abs().to_f64(), 3.25);
        assert!(SignedLog::from_f64(0.0).is_zero());
        assert_eq!(SignedLog::ZERO.mul(a).to_f64(), 0.0);
    }

    #[test]
    fn sum_handles_extreme_scales() {
        // e^{-2000} + e^{-2000} = 2 e^{-2000}, far below f64 range.
        let t = SignedLog::new(1, -2000.0);
        let s = signed_log_sum(&[t, t]);
        assert_eq!(s.sign, 1);
        assert!((s.ln_abs - (-2000.0 + 2f64.ln())).abs() < 1e-12);

        // Exact cancellation collapses to zero.
        let s2 = signed_log_sum(&[t, t.neg()]);
        assert!(s2.is_zero());
    }

    proptest! {
        #[test]
        fn sum_matches_f64_on_moderate_values(vals in proptest::collection::vec(-1e6f64..1e6, 1..12)) {
            let terms: Vec<SignedLog> = vals.iter().map(|&v| SignedLog::from_f64(v)).collect();
            let direct: f64 = vals.iter().sum();
            let viasum = signed_log_sum(&terms).to_f64();
            let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
            prop_assert!((direct - viasum).abs() <= 1e-9 * scale);
        }

        #[test]
        fn mul_matches_f64(a in -1e8f64..1e8, b in -1e8f64..1e8) {
            let p = SignedLog::from_f64(a).mul(SignedLog::from_f64(b)).to_f64();
            let q = a * b;
            prop_assert!((p - q).abs() <= 1e-9 * q.abs().max(1e-300));
        }
    }
}
