//! Independent oracles for the acceptance checks: high-order finite
//! difference stencils and a Simpson-rule Bessel evaluator. Nothing here
//! calls the library's own quadrature or series code.

/// k-th derivative of `f` at `x` by an O(h^4) central stencil, k ≤ 4.
pub fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let g = |i: i32| f(x + f64::from(i) * h);
    match k {
        1 => (g(-2) - 8.0 * g(-1) + 8.0 * g(1) - g(2)) / (12.0 * h),
        2 => (-g(-2) + 16.0 * g(-1) - 30.0 * g(0) + 16.0 * g(1) - g(2)) / (12.0 * h * h),
        3 => {
            (-g(-3) + 8.0 * g(-2) - 13.0 * g(-1) + 13.0 * g(1) - 8.0 * g(2) + g(3))
                / (8.0 * h.powi(3))
        }
        4 => {
            (-g(-3) / 6.0 + 2.0 * g(-2) - 13.0 / 2.0 * g(-1) + 28.0 / 3.0 * g(0)
                - 13.0 / 2.0 * g(1)
                + 2.0 * g(2)
                - g(3) / 6.0)
                / h.powi(4)
        }
        _ => panic!("no stencil for order {k}"),
    }
}

/// Mixed partial derivative of a scalar field by nested one-axis stencils.
pub fn fd_multi(f: &dyn Fn(&[f64]) -> f64, x: &[f64], alpha: &[usize], h: f64) -> f64 {
    match alpha.iter().position(|&a| a > 0) {
        None => f(x),
        Some(i) => {
            let mut rest = alpha.to_vec();
            rest[i] = 0;
            let g = |xi: f64| {
                let mut pt = x.to_vec();
                pt[i] = xi;
                fd_multi(f, &pt, &rest, h)
            };
            fd_derivative(&g, x[i], alpha[i], h)
        }
    }
}

/// `ln K_ν(a)` by Simpson's rule on `K_ν(a) = ∫₀^∞ e^{-a cosh u} cosh(νu) du`.
/// The integrand at u = 12 is below 1e-300 for every a ≥ 0.1, so the
/// truncation is exact at double precision; 4000 panels leave the rule's
/// own error near 1e-12 relative.
pub fn bessel_k_ln(nu: f64, a: f64) -> f64 {
    assert!(a >= 0.1, "oracle range starts at 0.1");
    let (lo, hi, m) = (0.0f64, 12.0f64, 4000usize);
    let g = |u: f64| (-a * (u.cosh() - 1.0)).exp() * (nu * u).cosh();
    let h = (hi - lo) / m as f64;
    let mut acc = g(lo) + g(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(lo + i as f64 * h);
    }
    (acc * h / 3.0).ln() - a
}

pub fn bessel_k(nu: f64, a: f64) -> f64 {
    bessel_k_ln(nu, a).exp()
}
