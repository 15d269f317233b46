//! Deterministic adaptive quadrature.
//!
//! One engine underlies everything: adaptive bisection with a 15-point
//! Gauss-Kronrod rule per panel. Time integrals over `(0,∞)` run in the
//! substituted variable `u = ln t`, so power-law behaviour at either end
//! becomes benign. Integrands of Laplace type `e^{-t-a²/(4t)}` concentrate
//! in the window `t ∈ (a/2 - ℓ, a/2 + ℓ)` with `ℓ ~ a^{3/4}`; the window
//! edges are inserted as panel boundaries up front so panels never straddle
//! them and the peak cannot slip between quadrature nodes.
//!
//! Everything here is single-threaded and evaluates in a fixed order, so a
//! given integrand and config produce bit-identical results run to run.

use std::cell::{Cell, RefCell};

use crate::logspace::SignedLog;
use crate::space::{Point, Region};
use crate::{Error, Result};

/// Tolerances and budget for one integration call.
#[derive(Clone, Debug)]
pub struct QuadConfig {
    /// Relative tolerance on the accumulated value.
    pub rel_tol: f64,
    /// Absolute floor for the convergence test; effectively off by default,
    /// so integrals that are genuinely zero need a caller-supplied floor.
    pub abs_tol: f64,
    /// Maximum bisection depth for a single panel.
    pub max_depth: u32,
    /// Insert Laplace-window edges as panel boundaries when a peak location
    /// is supplied. Turning this off is only for diagnostics.
    pub laplace_split: bool,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_depth: 44,
            laplace_split: true,
        }
    }
}

/// The value of one integral together with the engine's own error estimate
/// and the number of integrand evaluations spent.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

// 15-point Kronrod extension of the 7-point Gauss rule: abscissae and
// weights on [-1, 1]. The odd-index abscissae are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// QUADPACK-style inflation of the raw Gauss/Kronrod difference into a
/// conservative error bound.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

struct EvalCtx<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: Cell<u64>,
    bad_point: Cell<Option<f64>>,
}

impl<'a> EvalCtx<'a> {
    fn eval(&self, x: f64) -> f64 {
        self.evals.set(self.evals.get() + 1);
        let v = (self.f)(x);
        if !v.is_finite() {
            self.bad_point.set(Some(x));
        }
        v
    }
}

fn gk15(ctx: &EvalCtx, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = ctx.eval(c);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        fv1[j] = ctx.eval(c - h * XGK[j]);
        fv2[j] = ctx.eval(c + h * XGK[j]);
    }
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        resk += WGK[j] * (fv1[j] + fv2[j]);
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    for j in 0..3 {
        let i = 2 * j + 1;
        resg += WG[j] * (fv1[i] + fv2[i]);
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * h;
    let err = rescale_error((resk - resg) * h, resabs * h, resasc * h);
    (value, err)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

const MAX_PANELS: usize = 4096;

/// Adaptive engine over explicit initial panel boundaries.
fn adaptive(f: &dyn Fn(f64) -> f64, boundaries: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    debug_assert!(boundaries.len() >= 2);
    let ctx = EvalCtx {
        f,
        evals: Cell::new(0),
        bad_point: Cell::new(None),
    };
    let span = boundaries[boundaries.len() - 1] - boundaries[0];
    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    for w in boundaries.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&ctx, w[0], w[1]);
            panels.push(Panel {
                a: w[0],
                b: w[1],
                value,
                err,
                depth: 0,
            });
        }
    }
    if panels.is_empty() {
        return Err(Error::InvalidInput("empty integration domain".into()));
    }
    loop {
        if let Some(x) = ctx.bad_point.get() {
            return Err(Error::InvalidInput(format!(
                "integrand not finite at {x:.17e}"
            )));
        }
        let mut total = 0.0;
        let mut errsum = 0.0;
        for p in &panels {
            total += p.value;
            errsum += p.err;
        }
        if errsum <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            break;
        }
        // worst panel; ties resolved to the lowest index for determinism
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let p = panels[worst];
        if p.depth >= cfg.max_depth
            || (p.b - p.a) < 1e-13 * span.abs()
            || panels.len() >= MAX_PANELS
        {
            return Err(Error::MaxDepthExceeded {
                value: total,
                error_estimate: errsum,
                evaluations: ctx.evals.get(),
            });
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&ctx, p.a, m);
        let (v2, e2) = gk15(&ctx, m, p.b);
        panels[worst] = Panel {
            a: p.a,
            b: m,
            value: v1,
            err: e1,
            depth: p.depth + 1,
        };
        panels.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            err: e2,
            depth: p.depth + 1,
        });
    }
    // Fixed summation order: left to right.
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut errsum = 0.0;
    for p in &panels {
        let y = p.value - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
        errsum += p.err;
    }
    Ok(QuadResult {
        value,
        error_estimate: errsum,
        evaluations: ctx.evals.get(),
    })
}

/// `∫_a^b f(x) dx` on a finite interval.
pub fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bad interval [{a}, {b}]"
        )));
    }
    // Pre-split wide intervals so structure cannot hide between nodes.
    let n = (((b - a) / 4.0).ceil() as usize).clamp(1, 8);
    let mut bounds = Vec::with_capacity(n + 1);
    for i in 0..=n {
        bounds.push(a + (b - a) * i as f64 / n as f64);
    }
    adaptive(f, &bounds, cfg)
}

// Default box in u = ln t: t from 1e-20 to ~3.6e9. Integrands are expected
// to decay exponentially in t; seeds extend the box when a peak sits outside.
const U_MIN: f64 = -46.0;
const U_MAX: f64 = 22.0;

fn halfline_boundaries(seeds_t: &[f64], t_lo: f64, t_hi: f64) -> Vec<f64> {
    let mut u_lo = if t_lo > 0.0 { t_lo.ln() } else { U_MIN };
    let mut u_hi = if t_hi.is_finite() { t_hi.ln() } else { U_MAX };
    let mut bounds: Vec<f64> = Vec::new();
    for &s in seeds_t {
        if s.is_finite() && s > 0.0 {
            let u = s.ln();
            if u > u_lo && u < u_hi {
                bounds.push(u);
            }
            // extend the domain when a seed sits outside the default box
            if u + 2.0 > u_hi && t_hi.is_infinite() {
                u_hi = u + 2.0;
            }
            if u - 8.0 < u_lo && t_lo == 0.0 {
                u_lo = (u - 8.0).max(-700.0);
            }
        }
    }
    bounds.push(u_lo);
    bounds.push(u_hi);
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // pre-split panels wider than 6 in u
    let mut out = Vec::with_capacity(bounds.len() * 2);
    for w in bounds.windows(2) {
        out.push(w[0]);
        let width = w[1] - w[0];
        let parts = (width / 6.0).ceil() as usize;
        for i in 1..parts {
            out.push(w[0] + width * i as f64 / parts as f64);
        }
    }
    out.push(*bounds.last().unwrap());
    out
}

/// `∫₀^∞ f(t) dt` through the log substitution, with explicit panel
/// boundaries at the supplied positive `t` seeds.
pub fn halfline_with_seeds(
    f: &dyn Fn(f64) -> f64,
    seeds_t: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let bounds = halfline_boundaries(seeds_t, 0.0, f64::INFINITY);
    adaptive(&|u: f64| {
        let t = u.exp();
        f(t) * t
    }, &bounds, cfg)
}

/// `∫_{t_lo}^{t_hi} f(t) dt` on a sub-window of the half line, still in log
/// coordinates. `t_lo = 0` means "from the origin".
pub fn halfline_on_window(
    f: &dyn Fn(f64) -> f64,
    t_lo: f64,
    t_hi: f64,
    seeds_t: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if t_lo < 0.0 || !(t_hi > t_lo) {
        return Err(Error::InvalidInput(format!(
            "bad window [{t_lo}, {t_hi}]"
        )));
    }
    let bounds = halfline_boundaries(seeds_t, t_lo, t_hi);
    adaptive(&|u: f64| {
        let t = u.exp();
        f(t) * t
    }, &bounds, cfg)
}

/// `∫₀^∞ f(t) dt` for integrands with at most one sharp Laplace peak.
///
/// `laplace_point` is the peak location `t₀` (so `a = 2t₀` for integrands
/// of type `e^{-t-a²/(4t)}`); when [`QuadConfig::laplace_split`] is set, the
/// window edges `t₀ ± (2t₀)^{3/4}` become panel boundaries.
pub fn integrate_halfline(
    f: &dyn Fn(f64) -> f64,
    laplace_point: Option<f64>,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut seeds = Vec::new();
    if let Some(p) = laplace_point {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!(
                "laplace point must be positive and finite, got {p}"
            )));
        }
        if cfg.laplace_split {
            let ell = (2.0 * p).powf(0.75);
            seeds.push(p);
            if p - ell > 0.0 {
                seeds.push(p - ell);
            }
            seeds.push(p + ell);
        } else {
            // still allow the domain to stretch to reach the peak
            seeds.push(p);
        }
    }
    halfline_with_seeds(f, &seeds, cfg)
}

/// Signed log-domain half-line integral: `f_ln` returns `sign·e^{ln}` values
/// that may be far outside `f64` range. The integrand magnitude is probed on
/// the seeds and a coarse grid, everything is shifted by the maximum, and the
/// plain engine runs on the shifted values.
///
/// Returns the signed log value and `ln` of the absolute error bound (in the
/// same unshifted scale; `-∞` when the integrand is identically zero). An
/// integral that cancels so heavily that the requested relative tolerance is
/// unreachable still comes back `Ok`, with the error bound saying how much
/// of the cancellation remains uncertified; callers that need relative
/// accuracy must compare the two fields.
pub fn halfline_signed_log(
    f_ln: &dyn Fn(f64) -> SignedLog,
    seeds_t: &[f64],
    cfg: &QuadConfig,
) -> Result<(SignedLog, f64)> {
    let bounds = halfline_boundaries(seeds_t, 0.0, f64::INFINITY);
    let (u_lo, u_hi) = (bounds[0], *bounds.last().unwrap());
    let mut peak = f64::NEG_INFINITY;
    let mut probe = |t: f64| {
        let v = f_ln(t);
        if v.sign != 0 {
            peak = peak.max(v.ln_abs + t.ln());
        }
    };
    for i in 0..=48 {
        probe((u_lo + (u_hi - u_lo) * i as f64 / 48.0).exp());
    }
    for &s in seeds_t {
        if s > 0.0 && s.is_finite() {
            probe(s);
        }
    }
    if peak == f64::NEG_INFINITY {
        return Ok((SignedLog::ZERO, f64::NEG_INFINITY));
    }
    let shift = -peak;
    let shifted = |u: f64| {
        let t = u.exp();
        let v = f_ln(t);
        match v.sign {
            0 => 0.0,
            s => s as f64 * (v.ln_abs + shift + u).exp().min(f64::MAX),
        }
    };
    let (value, err) = match adaptive(&shifted, &bounds, cfg) {
        Ok(r) => (r.value, r.error_estimate),
        // heavy cancellation: keep the best value with its honest error bar
        Err(Error::MaxDepthExceeded {
            value,
            error_estimate,
            ..
        }) => (value, error_estimate),
        Err(e) => return Err(e),
    };
    let ln_err = if err > 0.0 {
        err.ln() - shift
    } else {
        f64::NEG_INFINITY
    };
    if value == 0.0 {
        return Ok((SignedLog::ZERO, ln_err));
    }
    Ok((SignedLog::from_f64(value).scale_ln(-shift), ln_err))
}

// ---------------------------------------------------------------------------
// Spatial integration over regions
// ---------------------------------------------------------------------------

/// A locus the integrand concentrates around: center and length scale.
/// Panel boundaries are inserted at `center ± {1,3,6}·width` on every axis,
/// far enough out that a Gaussian bump of that width has no mass left beyond
/// the outermost boundary.
#[derive(Clone, Debug)]
pub struct SpatialHint {
    pub center: Vec<f64>,
    pub width: f64,
}

fn axis_boundaries(lo: f64, hi: f64, hints: &[SpatialHint], axis: usize) -> Vec<f64> {
    let mut bounds = vec![lo, hi];
    for h in hints {
        if axis < h.center.len() && h.width > 0.0 {
            for m in [-6.0, -3.0, -1.0, 1.0, 3.0, 6.0] {
                let x = h.center[axis] + m * h.width;
                if x > lo && x < hi {
                    bounds.push(x);
                }
            }
        }
    }
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * (hi - lo).abs().max(1e-300));
    // pre-split long panels
    let mut out = Vec::with_capacity(bounds.len() * 2);
    for w in bounds.windows(2) {
        out.push(w[0]);
        let parts = ((w[1] - w[0]) / ((hi - lo) / 4.0)).ceil() as usize;
        for i in 1..parts.min(8) {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / parts as f64);
        }
    }
    out.push(hi);
    out
}

struct SpatialCtx<'a> {
    f: &'a dyn Fn(&Point) -> f64,
    region: &'a Region,
    against_mu: bool,
    hints: &'a [SpatialHint],
    cfg: &'a QuadConfig,
    evals: Cell<u64>,
    failure: RefCell<Option<Error>>,
    prefix: RefCell<Vec<f64>>,
}

fn spatial_level(ctx: &SpatialCtx) -> f64 {
    let axis = ctx.prefix.borrow().len();
    let n = ctx.region.dim();
    let (lo, hi) = ctx.region.axis_bounds(ctx.prefix.borrow().as_slice());
    if !(hi > lo) {
        return 0.0;
    }
    let bounds = axis_boundaries(lo, hi, ctx.hints, axis);
    // inner levels run tighter so their noise stays below the outer tolerance
    let level_cfg = QuadConfig {
        rel_tol: (ctx.cfg.rel_tol * 0.3f64.powi(axis as i32)).max(1e-13),
        ..ctx.cfg.clone()
    };
    let integrand = |z: f64| -> f64 {
        if ctx.failure.borrow().is_some() {
            return 0.0;
        }
        ctx.prefix.borrow_mut().push(z);
        let v = if axis + 1 == n {
            ctx.evals.set(ctx.evals.get() + 1);
            let p = Point::from_coords(ctx.prefix.borrow().as_slice());
            let w = if ctx.against_mu { (2.0 * p.x1).exp() } else { 1.0 };
            (ctx.f)(&p) * w
        } else {
            spatial_level(ctx)
        };
        ctx.prefix.borrow_mut().pop();
        v
    };
    match adaptive(&integrand, &bounds, &level_cfg) {
        Ok(r) => r.value,
        Err(e) => {
            let mut slot = ctx.failure.borrow_mut();
            if slot.is_none() {
                *slot = Some(e);
            }
            0.0
        }
    }
}

/// `∫_R f dy` or `∫_R f dμ` (`against_mu` multiplies `e^{2y₁}`), by iterated
/// adaptive quadrature along the coordinate axes. Exact region cross-sections
/// are used for every region kind, so this works for balls, boxes, and the
/// two experiment slabs alike.
pub fn integrate_spatial(
    f: &dyn Fn(&Point) -> f64,
    region: &Region,
    against_mu: bool,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    integrate_spatial_with_hints(f, region, against_mu, &[], cfg)
}

/// [`integrate_spatial`] with concentration hints (e.g. a heat kernel at
/// small time is a bump of width `√(4t)` around `x + 2t·e₁`).
pub fn integrate_spatial_with_hints(
    f: &dyn Fn(&Point) -> f64,
    region: &Region,
    against_mu: bool,
    hints: &[SpatialHint],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let ctx = SpatialCtx {
        f,
        region,
        against_mu,
        hints,
        cfg,
        evals: Cell::new(0),
        failure: RefCell::new(None),
        prefix: RefCell::new(Vec::with_capacity(region.dim())),
    };
    let value = spatial_level(&ctx);
    if let Some(e) = ctx.failure.into_inner() {
        return Err(e);
    }
    Ok(QuadResult {
        value,
        // Per-level tolerances were already balanced by the recursion; report
        // the requested relative tolerance against the value.
        error_estimate: value.abs() * cfg.rel_tol * 4.0,
        evaluations: ctx.evals.get(),
    })
}

/// Signed log-domain spatial integral. The magnitude is probed at the region
/// center, a few interior points, and the hint centers; the shifted integrand
/// then runs through the plain engine. A sharply peaked integrand whose true
/// maximum escapes the probe grid would overflow the shifted values, so the
/// pass tracks the largest magnitude it actually saw and reruns with that
/// shift when the headroom is gone.
pub fn spatial_signed_log(
    f_ln: &dyn Fn(&Point) -> SignedLog,
    region: &Region,
    against_mu: bool,
    hints: &[SpatialHint],
    cfg: &QuadConfig,
) -> Result<(SignedLog, f64)> {
    let mut probes = region.probe_points();
    for h in hints {
        if h.center.len() == region.dim() {
            probes.push(Point::from_coords(&h.center));
        }
    }
    let mut peak = f64::NEG_INFINITY;
    for p in &probes {
        if region.contains(p) {
            let v = f_ln(p);
            if v.sign != 0 {
                let w = if against_mu { 2.0 * p.x1 } else { 0.0 };
                peak = peak.max(v.ln_abs + w);
            }
        }
    }
    if peak == f64::NEG_INFINITY {
        return Ok((SignedLog::ZERO, 0.0));
    }
    for _ in 0..4 {
        let shift = -peak;
        let seen = Cell::new(f64::NEG_INFINITY);
        let outcome = integrate_spatial_with_hints(
            &|p: &Point| {
                let v = f_ln(p);
                match v.sign {
                    0 => 0.0,
                    s => {
                        let w = if against_mu { 2.0 * p.x1 } else { 0.0 };
                        seen.set(seen.get().max(v.ln_abs + w));
                        s as f64 * (v.ln_abs + shift).exp().min(f64::MAX)
                    }
                }
            },
            region,
            against_mu,
            hints,
            cfg,
        );
        // weighted magnitudes above e^{600} relative to the shift mean the
        // probe peak was wrong; rerun around what the pass actually found
        if seen.get() + shift > 600.0 {
            peak = seen.get();
            continue;
        }
        let r = outcome?;
        if r.value == 0.0 {
            return Ok((SignedLog::ZERO, r.error_estimate));
        }
        let rel = r.error_estimate / r.value.abs();
        return Ok((SignedLog::from_f64(r.value).scale_ln(-shift), rel));
    }
    Err(Error::InvalidInput(
        "integrand magnitude kept escaping the probed scale".into(),
    ))
}
