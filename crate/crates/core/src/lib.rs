//! Shipping-frequency procurement model and estimation engine.
//!
//! The crate has two halves:
//!
//! * A scalar optimization core: an importer procures an annual quantity and
//!   picks the shipment size that minimizes discounted procurement cost under
//!   exporter financing costs, delivery time, and a per-shipment fixed cost.
//!   [`model`] evaluates and solves that problem (closed form via the lower
//!   Lambert W branch, polished by safeguarded Newton), and [`statics`]
//!   certifies the sign of every comparative-statics claim by finite
//!   differences.
//! * A desk-scale econometrics engine: [`panel`] generates synthetic
//!   firm-product-mode-destination-year panels with planted coefficients, and
//!   [`estimation`] fits OLS and Poisson pseudo-maximum-likelihood models with
//!   high-dimensional fixed-effect absorption, distance splines, and
//!   cluster-robust inference.
//!
//! The math core is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below pin the double-precision
//! instantiation used by the CLI and the estimation stack.

pub mod estimation;
pub mod lambert_w;
pub mod model;
pub mod panel;
pub mod rng;
pub mod scalar;
pub mod statics;

pub use scalar::Real;

/// Double-precision model parameters (the default everywhere).
pub type Params = model::ModelParams<f64>;
/// Double-precision model solution.
pub type Solution = model::ModelSolution<f64>;
/// Single-precision variants, for callers that trade accuracy for width.
pub type Params32 = model::ModelParams<f32>;
pub type Solution32 = model::ModelSolution<f32>;
