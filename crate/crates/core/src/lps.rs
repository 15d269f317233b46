//! Operators applied to concrete source functions.
//!
//! Everything here composes a pointwise kernel from [`crate::kernels`] with a
//! [`SourceFunction`] in the `dμ` pairing: applying a kernel `K` to `f` means
//! `∫ K(x,y) f(y) dμ(y)`, so a point mass of weight `w` at `y₀` contributes
//! `w·K(x, y₀)` directly. On top of the plain applications sit the square
//! functions (an `L²(dt/t)` norm over the semigroup parameter) and the
//! maximal functions (a supremum over it).

use std::cell::RefCell;

use crate::diffop::DriftOperator;
use crate::kernels::v_kappa_sl;
use crate::kernels::{heat, poisson, riesz};
use crate::logspace::{signed_log_sum, SignedLog};
use crate::quadrature::{halfline_signed_log, spatial_signed_log, QuadConfig, SpatialHint};
use crate::space::{ln_weight_slab, mu_ball_ln, Point, Region};
use crate::{Error, Result};

/// Which semigroup a square or maximal function runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semigroup {
    Heat,
    Poisson,
}

/// A test function the operators act on. Only two shapes exist: the
/// indicator of a Euclidean ball, and a finite combination of point masses
/// of the measure `f dμ = Σ wᵢ δ_{yᵢ}`. `normalize` divides the output by
/// the total `μ`-mass.
#[derive(Clone, Debug)]
pub enum SourceFunction {
    IndicatorBall {
        center: Point,
        radius: f64,
        normalize: bool,
    },
    PointMasses {
        masses: Vec<(Point, f64)>,
        normalize: bool,
    },
}

impl SourceFunction {
    pub fn indicator_ball(center: Point, radius: f64, normalize: bool) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(SourceFunction::IndicatorBall {
            center,
            radius,
            normalize,
        })
    }

    pub fn point_masses(masses: Vec<(Point, f64)>, normalize: bool) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidInput("no point masses given".into()));
        }
        let n = masses[0].0.dim();
        for (p, w) in &masses {
            if p.dim() != n {
                return Err(Error::InvalidInput("point masses mix dimensions".into()));
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "point mass weights must be positive, got {w}"
                )));
            }
        }
        Ok(SourceFunction::PointMasses { masses, normalize })
    }

    /// `χ_{B(0,1)}`, the source every sharpness experiment uses.
    pub fn unit_ball(n: usize) -> Self {
        SourceFunction::IndicatorBall {
            center: Point::new(0.0, vec![0.0; n - 1]),
            radius: 1.0,
            normalize: false,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SourceFunction::IndicatorBall { center, .. } => center.dim(),
            SourceFunction::PointMasses { masses, .. } => masses[0].0.dim(),
        }
    }

    /// `ln ∫ f dμ`.
    pub fn mass_ln(&self) -> Result<f64> {
        match self {
            SourceFunction::IndicatorBall { center, radius, .. } => mu_ball_ln(center, *radius),
            SourceFunction::PointMasses { masses, .. } => {
                Ok(masses.iter().map(|(_, w)| w).sum::<f64>().ln())
            }
        }
    }

    fn norm_ln(&self) -> Result<f64> {
        let normalize = match self {
            SourceFunction::IndicatorBall { normalize, .. } => *normalize,
            SourceFunction::PointMasses { normalize, .. } => *normalize,
        };
        if normalize {
            Ok(-self.mass_ln()?)
        } else {
            Ok(0.0)
        }
    }

    /// Distance from `x` to the support.
    pub fn separation(&self, x: &Point) -> f64 {
        match self {
            SourceFunction::IndicatorBall { center, radius, .. } => x.dist(center) - radius,
            SourceFunction::PointMasses { masses, .. } => masses
                .iter()
                .map(|(p, _)| x.dist(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// A spatial scale for seeding time integrals: the distance from `x` to
    /// the middle of the support.
    fn scale_from(&self, x: &Point) -> f64 {
        match self {
            SourceFunction::IndicatorBall { center, .. } => x.dist(center),
            SourceFunction::PointMasses { masses, .. } => masses
                .iter()
                .map(|(p, _)| x.dist(p))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn require_separated(f: &SourceFunction, x: &Point) -> Result<()> {
    if f.separation(x) <= 0.0 {
        return Err(Error::InvalidInput(
            "evaluation point touches the support of the source".into(),
        ));
    }
    Ok(())
}

fn check_dims(f: &SourceFunction, x: &Point) -> Result<()> {
    if f.dim() != x.dim() {
        return Err(Error::InvalidInput(format!(
            "source lives in dimension {}, point in {}",
            f.dim(),
            x.dim()
        )));
    }
    Ok(())
}

/// `∫ K(y) f(y) dμ(y)` for a pointwise kernel `K` in signed log form.
fn apply_kernel_sl(
    f: &SourceFunction,
    kernel: &dyn Fn(&Point) -> Result<SignedLog>,
    hints: &[SpatialHint],
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    let norm = f.norm_ln()?;
    let v = match f {
        SourceFunction::PointMasses { masses, .. } => {
            let mut parts = Vec::with_capacity(masses.len());
            for (p, w) in masses {
                parts.push(kernel(p)?.scale(*w));
            }
            signed_log_sum(&parts)
        }
        SourceFunction::IndicatorBall { center, radius, .. } => {
            let region = Region::euclidean_ball(center.clone(), *radius);
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let (v, _rel) = spatial_signed_log(
                &|y: &Point| match kernel(y) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        SignedLog::ZERO
                    }
                },
                &region,
                true,
                hints,
                cfg,
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            v
        }
    };
    Ok(v.scale_ln(norm))
}

/// `R_D f(x) = ∫ R_D(x,y) f(y) dμ(y)`, for `x` separated from the support.
pub fn riesz_apply_sl(
    op: &DriftOperator,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    check_dims(f, x)?;
    require_separated(f, x)?;
    apply_kernel_sl(f, &|y: &Point| riesz::riesz_kernel_sl(op, x, y), &[], cfg)
}

/// [`riesz_apply_sl`] as a plain number.
pub fn riesz_apply(
    op: &DriftOperator,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(riesz_apply_sl(op, f, x, cfg)?.to_f64())
}

/// `e^{tΔ_v} f(x)`. No separation requirement: the heat kernel is smooth.
pub fn heat_apply_sl(t: f64, f: &SourceFunction, x: &Point, cfg: &QuadConfig) -> Result<SignedLog> {
    check_dims(f, x)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be positive, got {t}"
        )));
    }
    let hints = [heat::heat_hint(t, x)];
    apply_kernel_sl(f, &|y: &Point| Ok(heat::heat_sl(t, x, y)), &hints, cfg)
}

/// `D_x S_t f(x)` for the chosen semigroup.
pub fn semigroup_op_sl(
    kind: Semigroup,
    op: &DriftOperator,
    t: f64,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    let kernel = |y: &Point| match kind {
        Semigroup::Heat => Ok(op.apply_heat_sl(t, x, y)),
        Semigroup::Poisson => poisson::poisson_op_sl(op, t, x, y),
    };
    let hints = [heat::heat_hint(t, x)];
    apply_kernel_sl(f, &kernel, &hints, cfg)
}

/// `∂_t^k S_t f(x)` for the chosen semigroup.
pub fn semigroup_dt_sl(
    kind: Semigroup,
    k: usize,
    t: f64,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    let kernel = |y: &Point| match kind {
        Semigroup::Heat => Ok(heat::heat_dt_sl(k, t, x, y)),
        Semigroup::Poisson => poisson::poisson_dt_sl(k, t, x, y),
    };
    let hints = [heat::heat_hint(t, x)];
    apply_kernel_sl(f, &kernel, &hints, cfg)
}

fn time_seeds(scale: f64, order: f64) -> Vec<f64> {
    let s = scale.max(1e-3);
    let spread = s.powf(0.75);
    [
        s / 2.0,
        s * s / 4.0,
        s,
        1.0,
        order.max(1.0),
        s / 2.0 - spread,
        s / 2.0 + spread,
        (order.max(1.0) * s).sqrt(),
    ]
    .into_iter()
    .filter(|t| *t > 0.0 && t.is_finite())
    .collect()
}

fn sq_from_inner(
    inner: &dyn Fn(f64) -> Result<SignedLog>,
    weight_pow: f64,
    seeds: &[f64],
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let (v, _ln_err) = halfline_signed_log(
        &|t: f64| match inner(t) {
            Ok(v) => v.square().scale_ln((2.0 * weight_pow - 1.0) * t.ln()),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                SignedLog::ZERO
            }
        },
        seeds,
        cfg,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v.sqrt())
}

/// Vertical square function: `(∫ |t^w D_x S_t f(x)|² dt/t)^{1/2}` with
/// `w = q/2` over the heat semigroup and `w = q` over the Poisson one,
/// `q` the order of `D`.
pub fn vertical_sq_sl(
    kind: Semigroup,
    op: &DriftOperator,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    check_dims(f, x)?;
    require_separated(f, x)?;
    let q = op.order() as f64;
    let w = match kind {
        Semigroup::Heat => q / 2.0,
        Semigroup::Poisson => q,
    };
    let seeds = time_seeds(f.scale_from(x), q);
    sq_from_inner(
        &|t: f64| semigroup_op_sl(kind, op, t, f, x, cfg),
        w,
        &seeds,
        cfg,
    )
}

/// Horizontal square function: `(∫ |t^k ∂_t^k S_t f(x)|² dt/t)^{1/2}`,
/// `k ≥ 1`.
pub fn horizontal_sq_sl(
    kind: Semigroup,
    k: usize,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    check_dims(f, x)?;
    require_separated(f, x)?;
    if k == 0 {
        return Err(Error::InvalidInput(
            "horizontal square functions need k ≥ 1".into(),
        ));
    }
    let seeds = time_seeds(f.scale_from(x), k as f64);
    sq_from_inner(
        &|t: f64| semigroup_dt_sl(kind, k, t, f, x, cfg),
        k as f64,
        &seeds,
        cfg,
    )
}

const MAX_T_LO: f64 = 1e-3;
const MAX_T_HI: f64 = 1e4;
const MAX_GRID_PER_DECADE: usize = 64;

/// Horizontal maximal function `sup_t |t^k ∂_t^k S_t f(x)|` (`k = 0` gives
/// the plain semigroup maximal function). A log-spaced coarse scan over
/// `t ∈ [1e-3, 1e4]` locates the bump, golden-section refinement on `ln t`
/// finishes it. Returns the value and the maximizing `t`.
pub fn horizontal_max_sl(
    kind: Semigroup,
    k: usize,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<(SignedLog, f64)> {
    check_dims(f, x)?;
    let value_ln = |u: f64| -> Result<f64> {
        let t = u.exp();
        let v = if k == 0 {
            match kind {
                Semigroup::Heat => heat_apply_sl(t, f, x, cfg)?,
                Semigroup::Poisson => {
                    let kernel =
                        |y: &Point| poisson::poisson_sl(t, x, y);
                    apply_kernel_sl(f, &kernel, &[heat::heat_hint(t, x)], cfg)?
                }
            }
        } else {
            semigroup_dt_sl(kind, k, t, f, x, cfg)?
        };
        if v.sign == 0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Ok(k as f64 * u + v.ln_abs)
        }
    };
    let (u_lo, u_hi) = (MAX_T_LO.ln(), MAX_T_HI.ln());
    let decades = (MAX_T_HI / MAX_T_LO).log10();
    let steps = (decades * MAX_GRID_PER_DECADE as f64).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut grid = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let u = u_lo + (u_hi - u_lo) * i as f64 / steps as f64;
        let phi = value_ln(u)?;
        if phi > best.0 {
            best = (phi, i);
        }
        grid.push(u);
    }
    if best.0 == f64::NEG_INFINITY {
        return Ok((SignedLog::ZERO, 1.0));
    }
    let mut a = grid[best.1.saturating_sub(1)];
    let mut b = grid[(best.1 + 1).min(steps)];
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut peak = (best.0, grid[best.1]);
    for _ in 0..48 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        let (pc, pd) = (value_ln(c)?, value_ln(d)?);
        if pc > peak.0 {
            peak = (pc, c);
        }
        if pd > peak.0 {
            peak = (pd, d);
        }
        if pc > pd {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-10 {
            break;
        }
    }
    Ok((SignedLog::new(1, peak.0), peak.1.exp()))
}

/// `Ṽ_κ f(x) = ∫ V_κ(x,y) f(y) dμ(y)`. The kernel is nonnegative and
/// vanishes unless `x₁ - y₁ > 1`, so no separation is required.
pub fn v_kappa_apply_sl(
    kappa: f64,
    f: &SourceFunction,
    x: &Point,
    cfg: &QuadConfig,
) -> Result<SignedLog> {
    check_dims(f, x)?;
    apply_kernel_sl(f, &|y: &Point| Ok(v_kappa_sl(kappa, x, y)), &[], cfg)
}

/// The positive model kernel acting on Lebesgue point masses:
/// `e^{-2x₁}(x₁-y₁)^{(1-n)/2}` on `{x₁-y₁ > 1, |x'-y'| < √(x₁-y₁)}`.
pub fn t_op_kernel_sl(x: &Point, y: &Point) -> SignedLog {
    let n = x.dim();
    let gap = x.x1 - y.x1;
    if gap <= 1.0 || x.xp_dist_sq(y) >= gap {
        return SignedLog::ZERO;
    }
    SignedLog::new(1, -2.0 * x.x1 + (1.0 - n as f64) / 2.0 * gap.ln())
}

/// `T g(x)` for a point-mass source in the Lebesgue convention
/// (`g dy = Σ wᵢ δ_{yᵢ}`). Indicator sources are rejected: the operator is
/// defined on `L¹(dy)` data and the experiments only need atoms.
pub fn t_op_apply_sl(g: &SourceFunction, x: &Point) -> Result<SignedLog> {
    check_dims(g, x)?;
    match g {
        SourceFunction::IndicatorBall { .. } => Err(Error::InvalidInput(
            "the positive model operator takes point masses only".into(),
        )),
        SourceFunction::PointMasses { masses, .. } => {
            let parts: Vec<SignedLog> = masses
                .iter()
                .map(|(y, w)| t_op_kernel_sl(x, y).scale(*w))
                .collect();
            Ok(signed_log_sum(&parts).scale_ln(g.norm_ln()?))
        }
    }
}

/// `ln μ{ y ∈ R : |op(y)| > λ }` for a rectangular region, by a midpoint
/// cell grid. A cell whose corners disagree about the level straddles the
/// boundary and is refined once into `2ⁿ` subcells counted by their own
/// centers. Deterministic by construction.
pub fn level_set_measure_ln(
    op: &dyn Fn(&Point) -> Result<SignedLog>,
    region: &Region,
    lambda_ln: f64,
    grid_per_axis: usize,
) -> Result<f64> {
    let (lo, hi) = match region {
        Region::Rect { lo, hi } => (lo.clone(), hi.clone()),
        _ => {
            return Err(Error::InvalidInput(
                "level-set grids need a rectangular region".into(),
            ))
        }
    };
    if grid_per_axis < 2 {
        return Err(Error::InvalidInput("grid must have at least 2 cells".into()));
    }
    let n = lo.len();
    let above = |p: &Point| -> Result<bool> {
        let v = op(p)?;
        Ok(v.sign != 0 && v.ln_abs > lambda_ln)
    };
    // ln μ of an axis-aligned cell
    let cell_mu_ln = |a: &[f64], b: &[f64]| -> f64 {
        let mut ln = ln_weight_slab(a[0], b[0]);
        for i in 1..n {
            ln += (b[i] - a[i]).ln();
        }
        ln
    };
    let mut parts: Vec<SignedLog> = Vec::new();
    let cells = grid_per_axis.pow(n as u32);
    for flat in 0..cells {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut rest = flat;
        for i in 0..n {
            let step = (hi[i] - lo[i]) / grid_per_axis as f64;
            a[i] = lo[i] + step * (rest % grid_per_axis) as f64;
            b[i] = a[i] + step;
            rest /= grid_per_axis;
        }
        let center: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let center_above = above(&Point::from_coords(&center))?;
        let mut straddles = false;
        for bits in 0..(1usize << n) {
            let p: Vec<f64> = (0..n)
                .map(|i| if bits >> i & 1 == 0 { a[i] } else { b[i] })
                .collect();
            if above(&Point::from_coords(&p))? != center_above {
                straddles = true;
                break;
            }
        }
        if straddles {
            // refine once: count each subcell by its own center
            for bits in 0..(1usize << n) {
                let mut sa = vec![0.0; n];
                let mut sb = vec![0.0; n];
                for i in 0..n {
                    let step = (b[i] - a[i]) / 2.0;
                    sa[i] = a[i] + step * (bits >> i & 1) as f64;
                    sb[i] = sa[i] + step;
                }
                let sc: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| 0.5 * (x + y)).collect();
                if above(&Point::from_coords(&sc))? {
                    parts.push(SignedLog::new(1, cell_mu_ln(&sa, &sb)));
                }
            }
        } else if center_above {
            parts.push(SignedLog::new(1, cell_mu_ln(&a, &b)));
        }
    }
    let total = signed_log_sum(&parts);
    Ok(if total.sign == 0 {
        f64::NEG_INFINITY
    } else {
        total.ln_abs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_interval;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn point_mass_application_is_the_kernel() {
        let op = DriftOperator::dx_power(1, 1);
        let x = Point::one_d(2.0);
        let y = Point::one_d(0.3);
        let f = SourceFunction::point_masses(vec![(y.clone(), 2.0)], false).unwrap();
        let applied = riesz_apply_sl(&op, &f, &x, &cfg()).unwrap();
        let direct = riesz::riesz_kernel_sl(&op, &x, &y).unwrap().scale(2.0);
        assert_eq!(applied.sign, direct.sign);
        assert!((applied.ln_abs - direct.ln_abs).abs() < 1e-14);
    }

    #[test]
    fn application_is_linear_in_the_source() {
        let op = DriftOperator::dx_power(1, 2);
        let x = Point::one_d(3.0);
        let (y1, y2) = (Point::one_d(0.2), Point::one_d(-0.5));
        let both = SourceFunction::point_masses(
            vec![(y1.clone(), 0.7), (y2.clone(), 1.3)],
            false,
        )
        .unwrap();
        let first = SourceFunction::point_masses(vec![(y1, 0.7)], false).unwrap();
        let second = SourceFunction::point_masses(vec![(y2, 1.3)], false).unwrap();
        let v = riesz_apply(&op, &both, &x, &cfg()).unwrap();
        let v1 = riesz_apply(&op, &first, &x, &cfg()).unwrap();
        let v2 = riesz_apply(&op, &second, &x, &cfg()).unwrap();
        assert!((v - (v1 + v2)).abs() < 1e-12 * v.abs(), "{v} vs {}", v1 + v2);

        // the normalize flag divides by the μ-mass of the ball, nothing else
        let ball = SourceFunction::unit_ball(1);
        let scaled = SourceFunction::indicator_ball(Point::one_d(0.0), 1.0, true).unwrap();
        let raw = riesz_apply_sl(&op, &ball, &x, &cfg()).unwrap();
        let normed = riesz_apply_sl(&op, &scaled, &x, &cfg()).unwrap();
        let mass = ball.mass_ln().unwrap();
        assert_eq!(raw.sign, normed.sign);
        assert!((raw.ln_abs - mass - normed.ln_abs).abs() < 1e-12);
    }

    #[test]
    fn square_functions_are_positively_homogeneous() {
        let x = Point::one_d(5.0);
        let f1 = SourceFunction::point_masses(vec![(Point::one_d(0.0), 1.0)], false).unwrap();
        let f2 = SourceFunction::point_masses(vec![(Point::one_d(0.0), 2.0)], false).unwrap();
        let op = DriftOperator::dx_power(1, 2);
        let v1 = vertical_sq_sl(Semigroup::Heat, &op, &f1, &x, &cfg()).unwrap();
        let v2 = vertical_sq_sl(Semigroup::Heat, &op, &f2, &x, &cfg()).unwrap();
        assert!((v2.ln_abs - v1.ln_abs - 2f64.ln()).abs() < 1e-9);
        let h1 = horizontal_sq_sl(Semigroup::Heat, 2, &f1, &x, &cfg()).unwrap();
        let h2 = horizontal_sq_sl(Semigroup::Heat, 2, &f2, &x, &cfg()).unwrap();
        assert!((h2.ln_abs - h1.ln_abs - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn heat_flow_recovers_the_source_at_small_time() {
        let f = SourceFunction::unit_ball(1);
        let t = 1e-4;
        for x1 in [0.0, 0.3, -0.7] {
            let v = heat_apply_sl(t, &f, &Point::one_d(x1), &cfg())
                .unwrap()
                .to_f64();
            assert!((v - 1.0).abs() < 1e-6, "inside x={x1}: {v}");
        }
        for x1 in [1.8, -2.5] {
            let v = heat_apply_sl(t, &f, &Point::one_d(x1), &cfg())
                .unwrap()
                .to_f64();
            assert!(v.abs() < 1e-12, "outside x={x1}: {v}");
        }
    }

    #[test]
    fn plain_maximal_function_is_a_contraction() {
        // sup_t e^{tΔ_v}χ ≤ sup χ = 1 by positivity and conservation
        let f = SourceFunction::unit_ball(1);
        let (v, _tstar) =
            horizontal_max_sl(Semigroup::Heat, 0, &f, &Point::one_d(0.2), &cfg()).unwrap();
        let v = v.to_f64();
        assert!(v <= 1.0 + 1e-7, "{v}");
        assert!(v >= 0.99, "{v}");
    }

    #[test]
    fn time_derivative_inner_values_vanish_at_the_endpoints() {
        let f = SourceFunction::point_masses(vec![(Point::one_d(0.0), 1.0)], false).unwrap();
        let x = Point::one_d(3.0);
        for k in [1usize, 2] {
            for t in [1e-6, 1e4] {
                let v = semigroup_dt_sl(Semigroup::Heat, k, t, &f, &x, &cfg()).unwrap();
                let weighted = if v.sign == 0 {
                    f64::NEG_INFINITY
                } else {
                    v.ln_abs + k as f64 * t.ln()
                };
                assert!(weighted < -1000.0, "k={k} t={t}: {weighted}");
            }
        }
    }

    #[test]
    fn v_kappa_saturates_its_pointwise_bound() {
        // for κ=2, n=1 the kernel is exactly e^{-2x} once x-y > 1, so the
        // application equals e^{-2x}·μ(B) for x > 2
        let f = SourceFunction::unit_ball(1);
        let x = Point::one_d(3.0);
        let v = v_kappa_apply_sl(2.0, &f, &x, &cfg()).unwrap().to_f64();
        let bound = (-6.0f64).exp() * 2.0f64.sinh();
        assert!((v - bound).abs() < 1e-9 * bound, "{v} vs {bound}");
        assert!(v <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn t_operator_closed_form_values() {
        let g = SourceFunction::point_masses(
            vec![(Point::new(0.0, vec![0.0]), 1.0)],
            false,
        )
        .unwrap();
        // inside the paraboloid: e^{-2·4}·4^{-1/2}
        let v = t_op_apply_sl(&g, &Point::new(4.0, vec![0.5]))
            .unwrap()
            .to_f64();
        let expect = (-8.0f64).exp() / 2.0;
        assert!((v - expect).abs() < 1e-14 * expect, "{v}");
        // outside the paraboloid and below the gap cutoff
        assert_eq!(
            t_op_apply_sl(&g, &Point::new(4.0, vec![2.1])).unwrap().sign,
            0
        );
        assert_eq!(
            t_op_apply_sl(&g, &Point::new(0.5, vec![0.0])).unwrap().sign,
            0
        );
    }

    #[test]
    fn level_set_grid_agrees_with_the_closed_form() {
        // T of a unit Lebesgue mass at the origin in n=2; the level set of
        // λ = T(g*, ·) is {1 < x₁ < g*, |x₂| < √x₁} with μ-measure
        // ∫₁^{g*} 2√s e^{2s} ds
        let g = SourceFunction::point_masses(
            vec![(Point::new(0.0, vec![0.0]), 1.0)],
            false,
        )
        .unwrap();
        let gstar = 4.0f64;
        let lambda_ln = -2.0 * gstar - 0.5 * gstar.ln();
        let closed = integrate_interval(
            &|s: f64| 2.0 * s.sqrt() * (2.0 * s).exp(),
            1.0,
            gstar,
            &cfg(),
        )
        .unwrap()
        .value;
        let span = gstar + 2.0;
        let region = Region::rect(
            vec![1.0, -span.sqrt()],
            vec![span, span.sqrt()],
        );
        let grid = level_set_measure_ln(
            &|p: &Point| t_op_apply_sl(&g, p),
            &region,
            lambda_ln,
            64,
        )
        .unwrap();
        assert!(
            (grid - closed.ln()).abs() < 0.18,
            "grid {grid} vs closed {}",
            closed.ln()
        );
    }

    #[test]
    fn poisson_time_square_function_decays_with_the_weight() {
        let f = SourceFunction::point_masses(vec![(Point::one_d(0.0), 1.0)], false).unwrap();
        let g10 = horizontal_sq_sl(Semigroup::Poisson, 1, &f, &Point::one_d(10.0), &cfg())
            .unwrap();
        let g20 = horizontal_sq_sl(Semigroup::Poisson, 1, &f, &Point::one_d(20.0), &cfg())
            .unwrap();
        assert_eq!(g10.sign, 1);
        assert_eq!(g20.sign, 1);
        // e^{-2x₁} decay up to an algebraic factor
        let drop = g20.ln_abs - g10.ln_abs;
        assert!(drop < -17.9 && drop > -23.0, "drop {drop}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let op = DriftOperator::dx_power(1, 1);
        let ball = SourceFunction::unit_ball(1);
        // touching the support
        assert!(riesz_apply_sl(&op, &ball, &Point::one_d(1.0), &cfg()).is_err());
        assert!(riesz_apply_sl(&op, &ball, &Point::one_d(0.5), &cfg()).is_err());
        // k = 0 square function diverges
        assert!(horizontal_sq_sl(Semigroup::Heat, 0, &ball, &Point::one_d(5.0), &cfg()).is_err());
        // the model operator takes atoms only
        assert!(t_op_apply_sl(&ball, &Point::one_d(5.0)).is_err());
        // level sets need a box
        assert!(level_set_measure_ln(
            &|_p: &Point| Ok(SignedLog::new(1, 0.0)),
            &Region::sigma_eta(1, 50.0),
            0.0,
            8
        )
        .is_err());
        // malformed sources
        assert!(SourceFunction::point_masses(vec![], false).is_err());
        assert!(SourceFunction::indicator_ball(Point::one_d(0.0), -1.0, false).is_err());
        assert!(SourceFunction::point_masses(
            vec![(Point::one_d(0.0), -2.0)],
            false
        )
        .is_err());
        // dimension mismatch
        let f2 = SourceFunction::unit_ball(2);
        assert!(riesz_apply_sl(&op, &f2, &Point::one_d(5.0), &cfg()).is_err());
    }
}
