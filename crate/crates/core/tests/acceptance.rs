//! Acceptance battery: one check per shipping criterion, each printing a
//! single pass/fail line. Runs without the test harness so the lines come
//! out in order and the process exit code reflects the verdict.

mod common;

use std::panic::catch_unwind;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use driftlab_core::diffop::DriftOperator;
use driftlab_core::kernels::heat::{heat_dt, heat_dx, heat_hint, heat_kernel};
use driftlab_core::kernels::riesz::{riesz_kernel, riesz_kernel_quadrature};
use driftlab_core::quadrature::{
    integrate_interval, integrate_spatial_with_hints, QuadConfig, SpatialHint,
};
use driftlab_core::space::{Point, Region};
use driftlab_core::specfun::{b_nu_ln, BnuMode, MultiIndex};
use driftlab_core::verify::{
    estimate_ratio_suite, lemzz_window_suite, scalar_orlicz_inequality_test, sharpness_suite,
    weak_type_growth, RatioSuite, SharpnessFamily, SuiteOutcome, SuiteTarget, WeakTypeOp,
};

type Check = std::result::Result<String, String>;

fn main() {
    let checks: &[(&str, fn() -> Check)] = &[
        ("conservation and composition", c1),
        ("special-function oracle", c2),
        ("derivative cross-checks", c3),
        ("1-d kernel closed form", c4),
        ("ratio suites", c5),
        ("sharpness constructions", c6),
        ("growth exponents", c7),
        ("scalar orlicz inequality", c8),
        ("point-mass weak type", c9),
    ];
    let mut ok = true;
    for (i, (name, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panicked: {msg}"))
        });
        let dt = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{dt:.1}s] {detail}", i + 1),
            Err(reason) => {
                ok = false;
                println!("criterion {} ({name}): FAIL [{dt:.1}s] {reason}", i + 1);
            }
        }
    }
    std::process::exit(if ok { 0 } else { 1 });
}

fn test_point(n: usize, which: usize) -> Point {
    let a = [[0.3, -0.2, 0.1], [-0.5, 0.4, -0.3]][which];
    Point::from_coords(&a[..n])
}

/// Mass conservation `∫ p_t(x,·) dμ = 1` and the two-step composition
/// `∫ p_{t/2}(x,z) p_{t/2}(z,y) dμ(z) = p_t(x,y)`, for n up to 3 and t
/// across three decades, inside one minute.
fn c1() -> Check {
    let start = Instant::now();
    let cfg = QuadConfig {
        rel_tol: 1e-8,
        ..QuadConfig::default()
    };
    let mut worst_mass = 0.0f64;
    let mut worst_comp = 0.0f64;
    for n in 1..=3 {
        let x = test_point(n, 0);
        let y = test_point(n, 1);
        for t in [0.1f64, 1.0, 10.0] {
            let margin = 8.0 * (4.0 * t).sqrt();
            let center = {
                let mut c = x.coords();
                c[0] += 2.0 * t;
                c
            };
            let region = Region::rect(
                center.iter().map(|c| c - margin).collect(),
                center.iter().map(|c| c + margin).collect(),
            );
            let mass = integrate_spatial_with_hints(
                &|z| heat_kernel(t, &x, z),
                &region,
                true,
                &[heat_hint(t, &x)],
                &cfg,
            )
            .map_err(|e| format!("mass integral failed: {e}"))?;
            worst_mass = worst_mass.max((mass.value - 1.0).abs());

            let s = t / 2.0;
            let m = 8.0 * (4.0 * s).sqrt();
            let lo: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| a.min(b) - m).collect();
            let hi: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| a.max(b) + m).collect();
            let mid: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| 0.5 * (a + b)).collect();
            let hint = SpatialHint {
                center: mid,
                width: (2.0 * s).sqrt(),
            };
            let comp = integrate_spatial_with_hints(
                &|z| heat_kernel(s, &x, z) * heat_kernel(s, z, &y),
                &Region::rect(lo, hi),
                true,
                &[hint],
                &cfg,
            )
            .map_err(|e| format!("composition integral failed: {e}"))?;
            let target = heat_kernel(t, &x, &y);
            worst_comp = worst_comp.max((comp.value - target).abs() / target);
        }
    }
    if worst_mass > 1e-7 {
        return Err(format!("mass deviates by {worst_mass:.2e} (cap 1e-7)"));
    }
    if worst_comp > 1e-6 {
        return Err(format!("composition off by {worst_comp:.2e} relative (cap 1e-6)"));
    }
    let dt = start.elapsed().as_secs_f64();
    if dt > 60.0 {
        return Err(format!("overran the one-minute budget: {dt:.1}s"));
    }
    Ok(format!(
        "max |mass - 1| = {worst_mass:.2e}, max composition error = {worst_comp:.2e} relative"
    ))
}

/// The Laplace-type integral against half-integer closed forms on
/// a ∈ [0.1, 20] to 1e-8 relative, and the large-a leading term with an
/// O(1/a) correction whose fitted constant stays small on [30, 300].
fn c2() -> Check {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let closed_ln = |two_nu: i32, a: f64| -> f64 {
        match two_nu {
            1 => sqrt_pi.ln() - a,
            -1 => (2.0 * sqrt_pi / a).ln() - a,
            3 => (sqrt_pi / 2.0 * (a + 1.0)).ln() - a,
            -3 => (4.0 * sqrt_pi / (a * a) * (1.0 + 1.0 / a)).ln() - a,
            _ => unreachable!(),
        }
    };
    let mut worst = 0.0f64;
    for i in 0..40 {
        let a = (0.1f64.ln() + (20f64.ln() - 0.1f64.ln()) * i as f64 / 39.0).exp();
        for two_nu in [1, -1, 3, -3] {
            let mine = b_nu_ln(two_nu as f64 / 2.0, a, BnuMode::Quadrature)
                .map_err(|e| format!("quadrature failed at nu={two_nu}/2, a={a}: {e}"))?;
            let rel = ((mine - closed_ln(two_nu, a)).exp() - 1.0).abs();
            worst = worst.max(rel);
        }
    }
    if worst > 1e-8 {
        return Err(format!("closed-form deviation {worst:.2e} (cap 1e-8)"));
    }
    // leading asymptotic: 2 (a/2)^nu sqrt(pi/2a) e^{-a}
    let leading_ln = |nu: f64, a: f64| {
        2f64.ln() + nu * (a / 2.0).ln() + 0.5 * (std::f64::consts::PI / (2.0 * a)).ln() - a
    };
    let mut fitted_c = 0.0f64;
    for i in 0..25 {
        let a = (30f64.ln() + (300f64.ln() - 30f64.ln()) * i as f64 / 24.0).exp();
        for two_nu in [1, -1, 3, -3] {
            let nu = two_nu as f64 / 2.0;
            let mine = b_nu_ln(nu, a, BnuMode::Quadrature)
                .map_err(|e| format!("quadrature failed at nu={nu}, a={a}: {e}"))?;
            let r = (mine - leading_ln(nu, a)).exp();
            fitted_c = fitted_c.max((r - 1.0).abs() * a);
        }
    }
    if !fitted_c.is_finite() || fitted_c > 10.0 {
        return Err(format!("asymptotic correction constant {fitted_c:.3} out of range"));
    }
    Ok(format!(
        "closed forms to {worst:.1e}; |ratio - 1| <= C/a with C = {fitted_c:.3} on [30, 300]"
    ))
}

/// Time and space derivatives of the heat kernel against independent
/// finite-difference stencils, and the two kernel evaluation routes against
/// each other.
fn c3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_822);
    let draw_pair = |rng: &mut ChaCha8Rng, n: usize| {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect();
        (Point::from_coords(&x), Point::from_coords(&y))
    };

    let mut time_checked = 0;
    let mut worst_dt = 0.0f64;
    while time_checked < 24 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=4usize);
        let t = rng.gen_range(0.4..1.6);
        let (x, y) = draw_pair(&mut rng, n);
        let v = heat_dt(k, t, &x, &y);
        let scale = heat_kernel(t, &x, &y) / t.powi(k as i32);
        if v.abs() < 1e-2 * scale {
            continue;
        }
        let h = if k <= 2 { t / 120.0 } else { t / 60.0 };
        let fd = common::fd_derivative(&|s| heat_kernel(s, &x, &y), t, k, h);
        worst_dt = worst_dt.max((fd - v).abs() / v.abs());
        time_checked += 1;
    }
    if worst_dt > 1e-5 {
        return Err(format!("time-derivative mismatch {worst_dt:.2e} (cap 1e-5)"));
    }

    let mut space_checked = 0;
    let mut worst_dx = 0.0f64;
    while space_checked < 24 {
        let n = rng.gen_range(1..=3);
        let mut alpha = vec![0usize; n];
        for _ in 0..3 {
            let i = rng.gen_range(0..n);
            if rng.gen_bool(0.7) {
                alpha[i] += 1;
            }
        }
        let order: usize = alpha.iter().sum();
        if order == 0 {
            continue;
        }
        let t = rng.gen_range(0.4..1.6);
        let (x, y) = draw_pair(&mut rng, n);
        let ma = MultiIndex(alpha.clone());
        let v = heat_dx(&ma, t, &x, &y);
        let scale = heat_kernel(t, &x, &y) / (4.0 * t).sqrt().powi(order as i32);
        if v.abs() < 1e-2 * scale {
            continue;
        }
        let f = |c: &[f64]| heat_kernel(t, &Point::from_coords(c), &y);
        let fd = common::fd_multi(&f, &x.coords(), &alpha, 0.012);
        worst_dx = worst_dx.max((fd - v).abs() / v.abs());
        space_checked += 1;
    }
    if worst_dx > 1e-5 {
        return Err(format!("space-derivative mismatch {worst_dx:.2e} (cap 1e-5)"));
    }

    let ops_1d = [vec![1usize], vec![2], vec![3]];
    let ops_2d = [vec![1, 1], vec![0, 2], vec![2, 1]];
    let mut worst_routes = 0.0f64;
    for i in 0..20 {
        let n = if i % 2 == 0 { 1 } else { 2 };
        let alpha = if n == 1 {
            ops_1d[i % ops_1d.len()].clone()
        } else {
            ops_2d[i % ops_2d.len()].clone()
        };
        let op = DriftOperator::single(1.0, MultiIndex(alpha)).unwrap();
        let y1 = rng.gen_range(-0.5..0.5);
        let d = rng.gen_range(1.2..3.5);
        let (xp, yp) = if n == 2 {
            (vec![rng.gen_range(-1.0..1.0)], vec![rng.gen_range(-1.0..1.0)])
        } else {
            (vec![], vec![])
        };
        let x = Point::new(y1 + d, xp);
        let y = Point::new(y1, yp);
        let closed = riesz_kernel(&op, &x, &y).map_err(|e| format!("closed route: {e}"))?;
        let (quad, _ln_err) =
            riesz_kernel_quadrature(&op, &x, &y).map_err(|e| format!("direct route: {e}"))?;
        let rel = (closed - quad.to_f64()).abs() / closed.abs();
        worst_routes = worst_routes.max(rel);
    }
    if worst_routes > 1e-8 {
        return Err(format!("kernel routes disagree by {worst_routes:.2e} (cap 1e-8)"));
    }
    Ok(format!(
        "24 time and 24 space stencils to {worst_dt:.1e}/{worst_dx:.1e}; 20 dual-route points to {worst_routes:.1e}"
    ))
}

/// The one-dimensional first-order kernel against the Bessel combination
/// `pi^{-1} e^{-x-y} (-K_0(|x-y|) - sgn(x-y) K_1(|x-y|))`.
fn c4() -> Check {
    let op = DriftOperator::dx_power(1, 1);
    // values frozen from the Simpson oracle
    let frozen: [(f64, f64); 10] = [
        (0.2, -1.7014389623180741),
        (0.5, -0.49827301213755209),
        (0.8, -0.20411630309731286),
        (1.0, -0.11978495369586453),
        (1.5, -0.034886780642324043),
        (2.0, -0.010931604458333671),
        (3.0, -0.0011869295205008155),
        (5.0, -1.65912076191284066e-5),
        (8.0, -3.22307895825786294e-8),
        (12.0, -8.78447397553169477e-12),
    ];
    let mut worst_live = 0.0f64;
    let mut worst_frozen = 0.0f64;
    for (d, pinned) in frozen {
        let x = Point::one_d(d);
        let y = Point::one_d(0.0);
        let mine = riesz_kernel(&op, &x, &y).map_err(|e| format!("kernel failed at d={d}: {e}"))?;
        let oracle = -(common::bessel_k(0.0, d) + common::bessel_k(1.0, d))
            * (-d).exp()
            / std::f64::consts::PI;
        worst_live = worst_live.max((mine - oracle).abs() / oracle.abs());
        worst_frozen = worst_frozen.max((mine - pinned).abs() / pinned.abs());
    }
    if worst_live > 1e-7 {
        return Err(format!("off the Bessel oracle by {worst_live:.2e} (cap 1e-7)"));
    }
    if worst_frozen > 1e-9 {
        return Err(format!("regression against pinned values: {worst_frozen:.2e}"));
    }
    let at_one = riesz_kernel(&op, &Point::one_d(1.0), &Point::one_d(0.0)).unwrap();
    if (at_one - (-0.1197847)).abs() > 5e-7 {
        return Err(format!("value at (1,0) drifted: {at_one}"));
    }
    Ok(format!(
        "10 points on the Bessel oracle to {worst_live:.1e}, pinned values to {worst_frozen:.1e}"
    ))
}

/// Every kernel-size suite reports a finite constant under its cap, across
/// both dimensions and orders up to three, inside ten minutes.
fn c5() -> Check {
    let start = Instant::now();
    let quad = QuadConfig {
        rel_tol: 1e-6,
        ..QuadConfig::default()
    };
    let mut ran = 0usize;
    let mut max_constant = 0.0f64;
    for n in [1usize, 2] {
        for k in [1usize, 2, 3] {
            let op_target = SuiteTarget::Operator(DriftOperator::dx_power(n, k));
            for suite in [
                RatioSuite::RieszLocal,
                RatioSuite::RieszGlobal,
                RatioSuite::LpLocal,
                RatioSuite::LpGlobal,
            ] {
                let out = estimate_ratio_suite(suite, &op_target, 6, &quad)
                    .map_err(|e| format!("{} (n={n}, k={k}): {e}", suite.name()))?;
                if !out.pass {
                    return Err(out.summary);
                }
                ran += 1;
            }
            let t_target = SuiteTarget::Time { n, k };
            for suite in [RatioSuite::HkKernel, RatioSuite::HkMax, RatioSuite::GkKernel] {
                let out = estimate_ratio_suite(suite, &t_target, 6, &quad)
                    .map_err(|e| format!("{} (n={n}, k={k}): {e}", suite.name()))?;
                if !out.pass {
                    return Err(out.summary);
                }
                let max_ratio: f64 = out
                    .table
                    .rows
                    .iter()
                    .flat_map(|r| r[3..].iter().copied())
                    .fold(0.0, f64::max);
                max_constant = max_constant.max(max_ratio);
                ran += 1;
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    if dt > 600.0 {
        return Err(format!("overran the ten-minute budget: {dt:.1}s"));
    }
    Ok(format!(
        "{ran} suite runs, all finite under caps (largest time-suite ratio {max_constant:.2})"
    ))
}

/// The lower-bound constructions: sign correctness and at most a factor-two
/// drift of the normalized size between the smallest and largest slab.
fn c6() -> Check {
    let quad = QuadConfig {
        rel_tol: 1e-6,
        ..QuadConfig::default()
    };
    let etas = [50.0, 100.0, 200.0];
    let q3 = DriftOperator::dx_power(1, 3);
    let mut details = Vec::new();
    let suites: [(&str, driftlab_core::Result<SuiteOutcome>); 5] = [
        (
            "riesz",
            sharpness_suite(SharpnessFamily::Riesz, Some(&q3), 1, 0, &etas, 5, &quad),
        ),
        (
            "vertical heat",
            sharpness_suite(SharpnessFamily::VerticalHeat, Some(&q3), 1, 0, &etas, 5, &quad),
        ),
        (
            "vertical poisson",
            sharpness_suite(SharpnessFamily::VerticalPoisson, Some(&q3), 1, 0, &etas, 3, &quad),
        ),
        (
            "horizontal square",
            sharpness_suite(SharpnessFamily::HorizontalSq, None, 1, 2, &etas, 5, &quad),
        ),
        ("time window", lemzz_window_suite(2, 1, &etas, 5, 0.1)),
    ];
    for (label, outcome) in suites {
        let out = outcome.map_err(|e| format!("{label}: {e}"))?;
        if !out.pass {
            return Err(out.summary);
        }
        details.push(label);
    }
    Ok(format!("signs and magnitudes hold for: {}", details.join(", ")))
}

/// Level-set growth exponents across the slab family: the threshold case is
/// flat, the supercritical cases match their predicted slopes, and the
/// slopes increase strictly with the drift order.
fn c7() -> Check {
    let start = Instant::now();
    let quad = QuadConfig {
        rel_tol: 1e-6,
        ..QuadConfig::default()
    };
    let etas = [50.0, 75.0, 100.0, 150.0, 200.0];
    let mut slopes = Vec::new();
    let mut details = Vec::new();
    for (q, tol) in [(2usize, 0.1), (3, 0.25), (4, 0.25)] {
        let op = WeakTypeOp::Riesz(DriftOperator::dx_power(1, q));
        let (fit, _) = weak_type_growth(&op, &etas, 5, tol, &quad)
            .map_err(|e| format!("riesz q={q}: {e}"))?;
        if !fit.pass {
            return Err(format!(
                "riesz q={q}: slope {:.3} misses {} +- {tol}",
                fit.exponent_estimate, fit.target_exponent
            ));
        }
        slopes.push(fit.exponent_estimate);
        details.push(format!("q={q}: {:.3}", fit.exponent_estimate));
    }
    if !(slopes[0] < slopes[1] && slopes[1] < slopes[2]) {
        return Err(format!("slopes not strictly increasing: {slopes:?}"));
    }
    for (label, op, target) in [
        ("sup", WeakTypeOp::HorizontalMax { n: 1, k: 2 }, 0.5),
        ("square", WeakTypeOp::HorizontalSq { n: 1, k: 2 }, 0.25),
    ] {
        let (fit, _) = weak_type_growth(&op, &etas, 5, 0.25, &quad)
            .map_err(|e| format!("time {label} k=2: {e}"))?;
        if !fit.pass {
            return Err(format!(
                "time {label} k=2: slope {:.3} misses {target} +- 0.25",
                fit.exponent_estimate
            ));
        }
        details.push(format!("time {label} k=2: {:.3}", fit.exponent_estimate));
    }
    let dt = start.elapsed().as_secs_f64();
    if dt > 1800.0 {
        return Err(format!("overran the thirty-minute budget: {dt:.1}s"));
    }
    Ok(details.join("; "))
}

/// The pointwise scalar inequality behind the endpoint bound: no violations
/// at the fitted constant over a hundred thousand samples per exponent.
fn c8() -> Check {
    let mut details = Vec::new();
    for kappa in [3.0, 4.0, 6.0] {
        let out = scalar_orlicz_inequality_test(kappa, 100_000, 7)
            .map_err(|e| format!("kappa={kappa}: {e}"))?;
        if !out.pass {
            return Err(out.summary);
        }
        let c0 = out
            .summary
            .split("C0 = ")
            .nth(1)
            .and_then(|s| s.split(' ').next())
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| format!("summary lost the constant: {}", out.summary))?;
        details.push(format!("kappa={kappa}: C0={c0:.3}"));
    }
    Ok(format!("zero violations at the fitted constants ({})", details.join(", ")))
}

/// The model operator on a point mass: level-set masses computed from the
/// exact level sets stay bounded in lambda, for three mass locations.
fn c9() -> Check {
    let cfg = QuadConfig {
        rel_tol: 1e-10,
        ..QuadConfig::default()
    };
    let mut details = Vec::new();
    for y0 in [[0.0, 0.0], [-1.0, 0.5], [2.0, -1.0]] {
        let y1 = y0[0];
        // value along the support depends only on g = x1 - y1:
        // v(g) = e^{-2 y1 - 2g} g^{-1/2}, decreasing, so the level set of
        // lambda is {1 < g < g*, |x' - y'| < sqrt(g)} with v(g*) = lambda
        let v_ln = |g: f64| -2.0 * y1 - 2.0 * g - 0.5 * g.ln();
        let mut sup = 0.0f64;
        let mut last = 0.0f64;
        for j in 1..=24 {
            let lambda_ln = v_ln(1.0) - 1.1512925464970229 * j as f64; // half a decade per step
            let mut g = (-(lambda_ln + 2.0 * y1) / 2.0).max(1.01);
            for _ in 0..60 {
                let f = 2.0 * g + 0.5 * g.ln() + lambda_ln + 2.0 * y1;
                g -= f / (2.0 + 0.5 / g);
            }
            let mu = integrate_interval(&|s: f64| 2.0 * s.sqrt() * (2.0 * s).exp(), 1.0, g, &cfg)
                .map_err(|e| format!("measure integral failed: {e}"))?
                .value
                * (2.0 * y1).exp();
            let lambda_mu = lambda_ln.exp() * mu;
            if !lambda_mu.is_finite() {
                return Err(format!("level-set mass diverged at y0={y0:?}, step {j}"));
            }
            sup = sup.max(lambda_mu);
            last = lambda_mu;
        }
        if !(0.5..=3.0).contains(&sup) {
            return Err(format!("sup lambda*mu = {sup:.3} out of range at y0={y0:?}"));
        }
        details.push(format!("y0=({},{}) sup={sup:.4} tail={last:.4}", y0[0], y0[1]));
    }
    Ok(details.join("; "))
}
