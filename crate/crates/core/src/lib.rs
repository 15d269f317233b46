//! Numerical laboratory for the drift Laplacian `L = Δ + 2·∂₁` on ℝⁿ.
//!
//! The operator is symmetric with respect to the measure `dμ = e^{2x₁} dx`,
//! which has exponential volume growth in the `x₁` direction. Its heat kernel
//! is explicit,
//!
//! ```text
//! p_t(x,y) = (4πt)^{-n/2} e^{-x₁-y₁} e^{-t} e^{-|x-y|²/(4t)},
//! ```
//!
//! and everything in this crate is built on top of that formula: spatial and
//! time derivatives of `p_t`, the subordinated Poisson kernel, fractional
//! powers `(-L)^{-k/2}` and Riesz-type kernels `D(-L)^{-k/2}` for constant
//! coefficient operators `D` of order `k`, vertical and horizontal
//! Littlewood-Paley functions, and a family of model operators used to probe
//! weak type (1,1) behaviour.
//!
//! The crate is organised as a set of small modules:
//!
//! * [`space`]: points, regions, the weighted measure of balls and regions.
//! * [`specfun`]: Hermite polynomials, Laurent polynomials, and the Laplace
//!   transform family `B_ν(a) = ∫₀^∞ t^ν e^{-t} e^{-a²/(4t)} dt/t`.
//! * [`quadrature`]: deterministic adaptive Gauss-Kronrod integration on
//!   intervals, on the half line in logarithmic coordinates, and over
//!   regions of ℝⁿ.
//! * [`diffop`]: constant coefficient operators `D = Σ a_α ∂^α` and the
//!   empirical scan locating the directions where their Riesz kernel attains
//!   its asymptotic size.
//! * [`kernels`]: heat, Poisson, fractional power and Riesz kernels, with
//!   log-space evaluation so that scales like `e^{-1600}` stay usable.
//! * [`lps`]: operators applied to concrete source functions (indicator
//!   balls, point masses): Riesz transforms, square functions, maximal
//!   functions, and two model integral operators.
//! * [`verify`]: ratio suites, sharpness suites, weak type growth fits and
//!   the scalar Orlicz inequality test; everything returns plain report
//!   structs so callers decide how to persist them.

pub mod diffop;
pub mod error;
pub mod kernels;
pub mod logspace;
pub mod lps;
pub mod quadrature;
pub mod space;
pub mod specfun;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
