use thiserror::Error;

/// Failure modes surfaced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("coordinate overflow: |{value}| exceeds the per-axis cap {cap}")]
    Overflow { value: i128, cap: i64 },
    #[error("generators do not span the full lattice: quotient is {quotient}")]
    NotGroupGenerating { quotient: String },
    #[error("point {point:?} is not in the interior of the slope polytope with margin {margin}")]
    Domain { point: Vec<f64>, margin: f64 },
    #[error("slope polytopes of the two weights differ")]
    PolytopeMismatch,
    #[error("matrix is numerically singular (condition estimate {condition:.3e}); increase quadrature nodes")]
    Singular { condition: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
