use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("x = {x} lies outside the chart [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("expression error: {0}")]
    Expression(String),

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("kernel dimension {found} at x = {x} (expected 2); singular values {singular_values:?}")]
    ConstantCorankViolation {
        x: f64,
        found: usize,
        singular_values: Vec<f64>,
    },

    #[error("kernel bundle is non-orientable around the circle")]
    NontrivialBundle,

    #[error("slave equation did not converge at (eps = {eps:?}, x = {x}, y = {y}): {reason}")]
    OutsideValidity {
        eps: Vec<f64>,
        x: f64,
        y: f64,
        reason: String,
    },

    #[error("component {component} has no nonvanishing y-derivative up to order 6 at x = {x}")]
    FlatComponent { component: usize, x: f64 },

    #[error("variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("no solution branch found near x0 = {x0}")]
    NoBranch { x0: f64 },

    #[error("degeneracy check failed: {0}")]
    DegeneracyCheck(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
