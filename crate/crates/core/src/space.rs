//! Points, regions, and the weighted measure `dμ = e^{2y₁} dy`.
//!
//! The first coordinate is special throughout the crate: the drift points in
//! the `e₁` direction and the measure weight depends on `y₁` only. A
//! [`Point`] therefore stores `x1` separately from the transverse part `xp`.
//!
//! Regions know their exact one-dimensional cross-sections
//! ([`Region::axis_bounds`]), which is what the iterated quadrature in
//! [`crate::quadrature`] slices along, and their μ-measure in log form so
//! that slabs sitting at `x₁ = 400` do not overflow.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::specfun::unit_ball_volume;
use crate::{Error, Result};

/// A point of `ℝⁿ`, with the drift coordinate split off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub xp: Vec<f64>,
}

impl Point {
    pub fn new(x1: f64, xp: Vec<f64>) -> Self {
        Point { x1, xp }
    }

    /// One-dimensional point.
    pub fn one_d(x1: f64) -> Self {
        Point { x1, xp: Vec::new() }
    }

    pub fn from_coords(c: &[f64]) -> Self {
        assert!(!c.is_empty());
        Point {
            x1: c[0],
            xp: c[1..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        1 + self.xp.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.dim());
        c.push(self.x1);
        c.extend_from_slice(&self.xp);
        c
    }

    pub fn dist_sq(&self, o: &Point) -> f64 {
        let d1 = self.x1 - o.x1;
        d1 * d1 + self.xp_dist_sq(o)
    }

    pub fn dist(&self, o: &Point) -> f64 {
        self.dist_sq(o).sqrt()
    }

    /// Squared distance of the transverse parts only.
    pub fn xp_dist_sq(&self, o: &Point) -> f64 {
        debug_assert_eq!(self.xp.len(), o.xp.len());
        self.xp
            .iter()
            .zip(&o.xp)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Integration and sampling domains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Region {
    /// Axis-aligned box `Π [lo_i, hi_i]`.
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    /// Euclidean ball `|y - c| ≤ r`.
    EuclideanBall { center: Point, radius: f64 },
    /// Far slab `η ≤ x₁ ≤ η+1` with transverse ball
    /// `|x' - c'·√η| ≤ r·√η`; `cross_center` and `cross_radius` are in
    /// units of `√η`. Both are ignored when `n = 1`.
    OmegaEta {
        n: usize,
        eta: f64,
        cross_center: Vec<f64>,
        cross_radius: f64,
    },
    /// Near slab `η-1 ≤ x₁ ≤ η` with transverse box of side `√η`.
    SigmaEta { n: usize, eta: f64 },
}

impl Region {
    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(!lo.is_empty());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b));
        Region::Rect { lo, hi }
    }

    pub fn euclidean_ball(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0);
        Region::EuclideanBall { center, radius }
    }

    /// Far slab with the transverse ball centered on the axis.
    pub fn omega_eta(n: usize, eta: f64, cross_radius: f64) -> Self {
        assert!(n >= 1 && eta > 1.0);
        Region::OmegaEta {
            n,
            eta,
            cross_center: vec![0.0; n - 1],
            cross_radius,
        }
    }

    pub fn sigma_eta(n: usize, eta: f64) -> Self {
        assert!(n >= 1 && eta > 1.0);
        Region::SigmaEta { n, eta }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Rect { lo, .. } => lo.len(),
            Region::EuclideanBall { center, .. } => center.dim(),
            Region::OmegaEta { n, .. } | Region::SigmaEta { n, .. } => *n,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        match self {
            Region::Rect { lo, hi } => {
                let c = p.coords();
                c.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(x, (a, b))| *a <= *x && *x <= *b)
            }
            Region::EuclideanBall { center, radius } => p.dist(center) <= *radius,
            Region::OmegaEta {
                n,
                eta,
                cross_center,
                cross_radius,
            } => {
                if p.x1 < *eta || p.x1 > eta + 1.0 {
                    return false;
                }
                if *n == 1 {
                    return true;
                }
                let s = eta.sqrt();
                let d2: f64 = p
                    .xp
                    .iter()
                    .zip(cross_center)
                    .map(|(x, c)| (x - c * s) * (x - c * s))
                    .sum();
                d2.sqrt() <= cross_radius * s
            }
            Region::SigmaEta { n, eta } => {
                if p.x1 < eta - 1.0 || p.x1 > *eta {
                    return false;
                }
                if *n == 1 {
                    return true;
                }
                let half = eta.sqrt() / 2.0;
                p.xp.iter().all(|x| x.abs() <= half)
            }
        }
    }

    /// Bounds of coordinate `prefix.len()` once the coordinates in `prefix`
    /// are fixed. Returns an empty interval when the cross-section is empty.
    pub fn axis_bounds(&self, prefix: &[f64]) -> (f64, f64) {
        let k = prefix.len();
        debug_assert!(k < self.dim());
        match self {
            Region::Rect { lo, hi } => (lo[k], hi[k]),
            Region::EuclideanBall { center, radius } => {
                let c = center.coords();
                let mut rem = radius * radius;
                for (x, ci) in prefix.iter().zip(&c) {
                    rem -= (x - ci) * (x - ci);
                }
                if rem <= 0.0 {
                    return (0.0, 0.0);
                }
                let h = rem.sqrt();
                (c[k] - h, c[k] + h)
            }
            Region::OmegaEta {
                eta,
                cross_center,
                cross_radius,
                ..
            } => {
                if k == 0 {
                    return (*eta, eta + 1.0);
                }
                let s = eta.sqrt();
                let mut rem = cross_radius * cross_radius * eta;
                for (x, c) in prefix[1..].iter().zip(cross_center) {
                    rem -= (x - c * s) * (x - c * s);
                }
                if rem <= 0.0 {
                    return (0.0, 0.0);
                }
                let h = rem.sqrt();
                let c = cross_center[k - 1] * s;
                (c - h, c + h)
            }
            Region::SigmaEta { eta, .. } => {
                if k == 0 {
                    (eta - 1.0, *eta)
                } else {
                    let half = eta.sqrt() / 2.0;
                    (-half, half)
                }
            }
        }
    }

    /// Smallest axis-aligned box containing the region.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        match self {
            Region::Rect { lo, hi } => (lo.clone(), hi.clone()),
            Region::EuclideanBall { center, radius } => {
                let c = center.coords();
                (
                    c.iter().map(|x| x - radius).collect(),
                    c.iter().map(|x| x + radius).collect(),
                )
            }
            Region::OmegaEta {
                eta,
                cross_center,
                cross_radius,
                ..
            } => {
                let s = eta.sqrt();
                let mut lo = vec![*eta];
                let mut hi = vec![eta + 1.0];
                for c in cross_center {
                    lo.push(c * s - cross_radius * s);
                    hi.push(c * s + cross_radius * s);
                }
                debug_assert_eq!(lo.len(), n);
                (lo, hi)
            }
            Region::SigmaEta { eta, .. } => {
                let half = eta.sqrt() / 2.0;
                let mut lo = vec![eta - 1.0];
                let mut hi = vec![*eta];
                for _ in 1..n {
                    lo.push(-half);
                    hi.push(half);
                }
                (lo, hi)
            }
        }
    }

    /// A handful of interior points for probing integrand magnitude.
    pub fn probe_points(&self) -> Vec<Point> {
        let (lo, hi) = self.bounding_box();
        let n = lo.len();
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut out = Vec::with_capacity(1 + 4 * n);
        let cp = Point::from_coords(&center);
        if self.contains(&cp) {
            out.push(cp);
        }
        for k in 0..n {
            let h = 0.5 * (hi[k] - lo[k]);
            for delta in [-0.6, -0.25, 0.25, 0.6] {
                let mut c = center.clone();
                c[k] += delta * h;
                let p = Point::from_coords(&c);
                if self.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// `ln μ(B(center, r))` where `dμ = e^{2y₁} dy`, via the substitution
/// `y₁ = x₁ + r sin θ` which removes the endpoint singularity of the
/// cross-section volume:
/// `μ(B) = e^{2x₁} v_{n-1} rⁿ ∫ e^{2r sin θ} cosⁿθ dθ`.
pub fn mu_ball_ln(center: &Point, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("bad ball radius {r}")));
    }
    let n = center.dim();
    let cfg = crate::quadrature::QuadConfig {
        rel_tol: 1e-12,
        ..Default::default()
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta_int = crate::quadrature::integrate_interval(
        &|th: f64| (2.0 * r * th.sin()).exp() * th.cos().powi(n as i32),
        -half_pi,
        half_pi,
        &cfg,
    )?;
    Ok(2.0 * center.x1
        + (unit_ball_volume(n - 1) * r.powi(n as i32) * theta_int.value).ln())
}

/// `μ(B(center, r))` as a plain number; overflows for `x₁ ≳ 350`.
pub fn mu_ball(center: &Point, r: f64) -> Result<f64> {
    Ok(mu_ball_ln(center, r)?.exp())
}

/// `ln( (e^{2b} - e^{2a}) / 2 )` for `a < b`, stable for large `b`.
pub fn ln_weight_slab(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    2.0 * b + (-(-2.0 * (b - a)).exp()).ln_1p() - std::f64::consts::LN_2
}

/// `ln μ(R)` in closed form where one exists; balls fall back to
/// [`mu_ball_ln`].
pub fn region_log_measure(region: &Region) -> Result<f64> {
    match region {
        Region::Rect { lo, hi } => {
            let mut ln = ln_weight_slab(lo[0], hi[0]);
            for (a, b) in lo[1..].iter().zip(&hi[1..]) {
                ln += (b - a).ln();
            }
            Ok(ln)
        }
        Region::EuclideanBall { center, radius } => mu_ball_ln(center, *radius),
        Region::OmegaEta {
            n,
            eta,
            cross_radius,
            ..
        } => {
            let mut ln = ln_weight_slab(*eta, eta + 1.0);
            if *n > 1 {
                ln += unit_ball_volume(*n - 1).ln()
                    + (*n as f64 - 1.0) * (cross_radius * eta.sqrt()).ln();
            }
            Ok(ln)
        }
        Region::SigmaEta { n, eta } => {
            let ln = ln_weight_slab(eta - 1.0, *eta)
                + (*n as f64 - 1.0) * 0.5 * eta.ln();
            Ok(ln)
        }
    }
}

/// `μ(R)` as a plain number; overflows once `ln μ ≳ 709`.
pub fn region_measure(region: &Region) -> Result<f64> {
    Ok(region_log_measure(region)?.exp())
}

/// How [`sample_region`] places its points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleScheme {
    /// Tensor midpoint grid on the bounding box, filtered to the region,
    /// thinned to the requested count. Independent of the seed.
    Grid,
    /// Seeded rejection sampling from the bounding box.
    Random,
}

/// Deterministically draw `m` points from a region. `Grid` ignores the seed;
/// `Random` uses it. Returns fewer than `m` points only when the scheme is
/// `Grid` and the region is so thin that the refined grid still misses it.
pub fn sample_region(
    region: &Region,
    m: usize,
    scheme: SampleScheme,
    seed: u64,
) -> Result<Vec<Point>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = region.bounding_box();
    let n = lo.len();
    match scheme {
        SampleScheme::Grid => {
            if m == 1 {
                let center: Vec<f64> =
                    lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let p = Point::from_coords(&center);
                if region.contains(&p) {
                    return Ok(vec![p]);
                }
            }
            let mut g = (m as f64).powf(1.0 / n as f64).ceil() as usize;
            for _ in 0..12 {
                let mut hits: Vec<Point> = Vec::new();
                let mut idx = vec![0usize; n];
                loop {
                    let coords: Vec<f64> = (0..n)
                        .map(|i| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64 + 0.5) / g as f64)
                        .collect();
                    let p = Point::from_coords(&coords);
                    if region.contains(&p) {
                        hits.push(p);
                    }
                    // odometer increment over the g^n grid
                    let mut axis = n;
                    loop {
                        if axis == 0 {
                            break;
                        }
                        axis -= 1;
                        idx[axis] += 1;
                        if idx[axis] < g {
                            break;
                        }
                        idx[axis] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
                if hits.len() >= m {
                    let picked = (0..m)
                        .map(|i| hits[i * hits.len() / m].clone())
                        .collect();
                    return Ok(picked);
                }
                g = g * 3 / 2 + 1;
            }
            Err(Error::EmptyRegion(format!("{region:?}")))
        }
        SampleScheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(m);
            let mut attempts = 0u64;
            while out.len() < m {
                attempts += 1;
                if attempts > 20_000 * m as u64 {
                    return Err(Error::EmptyRegion(format!("{region:?}")));
                }
                let coords: Vec<f64> = (0..n)
                    .map(|i| rng.gen_range(lo[i]..hi[i]))
                    .collect();
                let p = Point::from_coords(&coords);
                if region.contains(&p) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_ball_one_d_closed_form() {
        // ∫_{-1}^{1} e^{2y} dy = sinh(2)
        let v = mu_ball(&Point::one_d(0.0), 1.0).unwrap();
        assert!((v - 3.626_860_407_847_018_8).abs() < 1e-11, "{v}");
        // translation multiplies by e^{2x₁}
        let v5 = mu_ball(&Point::one_d(5.0), 1.0).unwrap();
        assert!((v5 / v - 10f64.exp()).abs() < 1e-6 * 10f64.exp());
    }

    #[test]
    fn mu_ball_matches_direct_integration_2d() {
        let c = Point::new(0.7, vec![-0.3]);
        let r = 1.3;
        let ball = Region::euclidean_ball(c.clone(), r);
        let direct = crate::quadrature::integrate_spatial(
            &|_| 1.0,
            &ball,
            true,
            &crate::quadrature::QuadConfig::default(),
        )
        .unwrap();
        let closed = mu_ball(&c, r).unwrap();
        assert!(
            (direct.value - closed).abs() < 1e-7 * closed,
            "{} vs {closed}",
            direct.value
        );
    }

    #[test]
    fn slab_measures_closed_forms() {
        // Ω at η=5 in one dimension: (e^{12}-e^{10})/2
        let om = Region::omega_eta(1, 5.0, 0.0);
        let v = region_measure(&om).unwrap();
        assert!((v - 70_364.162_812_098_60).abs() < 1e-6, "{v}");
        // Σ at η=4 in two dimensions: (e^8-e^6)/2 · √4 = e^8 - e^6
        let sg = Region::sigma_eta(2, 4.0);
        let v = region_measure(&sg).unwrap();
        assert!((v - 2_577.529_193_548_993_2).abs() < 1e-8, "{v}");
    }

    #[test]
    fn log_measure_survives_far_slabs() {
        let om = Region::omega_eta(1, 400.0, 0.0);
        let ln = region_log_measure(&om).unwrap();
        // ln[(e^{802}-e^{800})/2] = 802 + ln(1-e^{-2}) - ln 2
        let expect = 802.0 + (1.0 - (-2.0f64).exp()).ln() - std::f64::consts::LN_2;
        assert!((ln - expect).abs() < 1e-12, "{ln} vs {expect}");
    }

    #[test]
    fn axis_bounds_consistent_with_contains() {
        let regions = vec![
            Region::euclidean_ball(Point::new(1.0, vec![2.0, -1.0]), 0.8),
            Region::omega_eta(2, 9.0, 1.5),
            Region::sigma_eta(3, 16.0),
            Region::rect(vec![0.0, -2.0], vec![1.0, 2.0]),
        ];
        for region in &regions {
            let n = region.dim();
            let mut prefix: Vec<f64> = Vec::new();
            // walk down the midpoints of each axis cross-section
            for _ in 0..n {
                let (a, b) = region.axis_bounds(&prefix);
                assert!(b >= a);
                prefix.push(0.5 * (a + b));
            }
            let p = Point::from_coords(&prefix);
            assert!(region.contains(&p), "{region:?} misses {p:?}");
        }
    }

    #[test]
    fn grid_sampling_exact_count_and_deterministic() {
        let ball = Region::euclidean_ball(Point::new(0.0, vec![0.0]), 1.0);
        let a = sample_region(&ball, 25, SampleScheme::Grid, 0).unwrap();
        let b = sample_region(&ball, 25, SampleScheme::Grid, 99).unwrap();
        assert_eq!(a.len(), 25);
        assert_eq!(a, b);
        for p in &a {
            assert!(ball.contains(p));
        }
        let single = sample_region(&ball, 1, SampleScheme::Grid, 0).unwrap();
        assert_eq!(single[0], Point::new(0.0, vec![0.0]));
    }

    #[test]
    fn random_sampling_seeded() {
        let om = Region::omega_eta(2, 25.0, 1.0);
        let a = sample_region(&om, 40, SampleScheme::Random, 7).unwrap();
        let b = sample_region(&om, 40, SampleScheme::Random, 7).unwrap();
        let c = sample_region(&om, 40, SampleScheme::Random, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for p in &a {
            assert!(om.contains(p));
        }
    }

    #[test]
    fn probe_points_stay_inside() {
        for region in [
            Region::euclidean_ball(Point::new(3.0, vec![1.0]), 0.5),
            Region::omega_eta(1, 100.0, 0.0),
            Region::sigma_eta(2, 100.0),
        ] {
            let probes = region.probe_points();
            assert!(!probes.is_empty());
            for p in probes {
                assert!(region.contains(&p));
            }
        }
    }
}
