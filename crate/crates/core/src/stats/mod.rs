//! Numerical kernel: normal and Student-t distributions, type-6 sample
//! quantiles, ordinary least squares and the one-sample KS uniformity test.
//!
//! Everything here is a pure function of its arguments.

mod ks;
mod normal;
mod ols;
mod quantile;
mod special;
mod student_t;

use serde::Serialize;
use thiserror::Error;

pub use ks::{kolmogorov_sf, ks_statistic, ks_uniform_test};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use ols::{ols_fit, Design, OlsFit};
pub use quantile::quantile_type6;
pub use special::{ln_gamma, regularized_incomplete_beta};
pub use student_t::student_t_sf;

pub(crate) use normal::sf as normal_sf_unchecked;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("non-finite input: {value}")]
    NonFinite { value: f64 },
    #[error("probability {value} outside the allowed range")]
    ProbabilityOutOfRange { value: f64 },
    #[error("degrees of freedom must be >= 1, got {df}")]
    InvalidDegreesOfFreedom { df: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutsideUnitInterval { index: usize, value: f64 },
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("need more observations than regressors (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Which procedure produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    /// One-sample Kolmogorov–Smirnov against U(0,1).
    KsUniform,
    /// t-test on the squared-rank term of an OLS fit of sorted p-values.
    QuadraticOls,
    /// t-test on a single OLS slope.
    SlopeOls,
}

impl TestMethod {
    pub fn label(self) -> &'static str {
        match self {
            TestMethod::KsUniform => "ks-uniform",
            TestMethod::QuadraticOls => "quadratic-ols",
            TestMethod::SlopeOls => "slope-ols",
        }
    }

    /// Whether the method refers its statistic to a Student-t distribution.
    pub fn uses_t_reference(self) -> bool {
        !matches!(self, TestMethod::KsUniform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Present exactly when `method` uses a t reference distribution.
    pub df: Option<f64>,
    pub method: TestMethod,
}
