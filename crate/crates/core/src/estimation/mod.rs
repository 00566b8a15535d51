//! OLS and Poisson pseudo-maximum-likelihood estimation with
//! high-dimensional fixed-effect absorption, distance splines,
//! cluster-robust covariance, and elasticity conversion.

pub mod absorb;
pub mod design;
pub mod effects;
mod linalg;
pub mod ols;
pub mod ppml;
pub mod separation;
pub mod spec;
pub mod vcov;

pub use design::{build_design, term_value, Design};
pub use effects::{elasticity_effects, write_estimates_csv, EffectKind, EffectRow};
pub use ols::fit_ols;
pub use ppml::fit_ppml;
pub use spec::{Estimator, EstimationSpec, FeFactor, FeGroup, Field, OutcomeVar, SplineBand, Term};
pub use vcov::cluster_sandwich;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("invalid estimation spec: {message}")]
    InvalidSpec { message: String },
    #[error("panel is missing field `{name}`")]
    MissingField { name: String },
    #[error("nonpositive value under log for `{field}` on row {row}")]
    NonPositiveUnderLog { field: String, row: String },
    #[error("the singleton/separation cascade emptied the sample")]
    AllRowsDropped,
    #[error("cluster-robust inference needs at least two clusters")]
    SingleCluster,
    #[error("IRLS did not converge after {iterations} iterations (deviance trace {trace:?})")]
    NonConvergence { iterations: usize, trace: Vec<f64> },
    #[error("fixed-effect absorption stalled after {sweeps} sweeps")]
    AbsorptionStalled { sweeps: usize },
    #[error("numerical failure: {message}")]
    Numeric { message: String },
    #[error("unknown coefficient `{name}`")]
    UnknownCoefficient { name: String },
}

/// Iteration bookkeeping of a fit.
#[derive(Clone, Debug)]
pub struct ConvergenceLog {
    pub iterations: usize,
    pub final_relative_change: f64,
    /// Deviance per iteration (residual sum of squares for OLS).
    pub deviance_trace: Vec<f64>,
}

/// Fitted model: retained coefficients with cluster-robust inference and
/// sample bookkeeping.
#[derive(Clone, Debug)]
pub struct EstimateResult {
    pub terms: Vec<Term>,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub vcov_clustered: DMatrix<f64>,
    pub se: Vec<f64>,
    pub n_obs_used: usize,
    pub n_clusters: usize,
    pub n_dropped_separation: usize,
    pub n_dropped_singleton: usize,
    pub dropped_collinear: Vec<String>,
    /// R² for OLS, deviance-based pseudo-R² for PPML.
    pub fit: f64,
    pub convergence: ConvergenceLog,
    /// Fitted outcome per used row (conditional mean for PPML).
    pub fitted: Vec<f64>,
    /// Indices into the input panel of the rows that survived drops.
    pub used_rows: Vec<usize>,
}

impl EstimateResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.coefficients[k])
    }

    pub fn se_for(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.se[k])
    }
}

/// Builds the design for `spec` over `panel` and fits it with the
/// requested estimator.
pub fn fit(
    panel: &[crate::panel::PanelObservation],
    spec: &EstimationSpec,
) -> Result<EstimateResult, EstimationError> {
    let design = build_design(panel, spec)?;
    match spec.estimator {
        Estimator::Ols => fit_ols(&design),
        Estimator::Ppml => fit_ppml(&design),
    }
}
