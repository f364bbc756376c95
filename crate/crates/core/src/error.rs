use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular block: pivot {pivot:.3e} below threshold {threshold:.3e} at step {step}")]
    SingularBlock {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error(
        "singular redundant block at level {level}, cluster center {center:?}, |c| = {size}, rank {rank}: {source}"
    )]
    SingularRedundantBlock {
        level: String,
        center: Vec<f64>,
        size: usize,
        rank: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("kernel evaluated at nonpositive distance {0}")]
    NonpositiveDistance(f64),

    #[error("problem size {n} exceeds dense operator cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("operator requires a translation-invariant kernel on a uniform grid")]
    NotTranslationInvariant,

    #[error("GMRES did not converge in {iterations} iterations (residual {residual:.3e})")]
    MaxIterationsExceeded {
        iterations: usize,
        residual: f64,
        partial: Vec<num_complex::Complex64>,
    },

    #[error("scalar field mismatch: {0}")]
    ScalarFieldMismatch(String),

    #[error("malformed factorization file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
