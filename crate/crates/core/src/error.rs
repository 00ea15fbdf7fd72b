use thiserror::Error;

/// Errors shared by all modules of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Tied, zero, or otherwise singular coordinates where an interior
    /// chamber point is required.
    #[error("singular input: {0}")]
    SingularInput(String),

    /// The requested combination has no implemented formula or scheme.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Deterministic integration could not proceed above the minimum step.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// Importance weights too degenerate to trust the estimate.
    #[error(
        "degenerate importance weights: effective sample size {ess:.1} < {min_ess}; \
         increase the sample count or reduce the dimension/coupling"
    )]
    DegenerateWeights { ess: f64, min_ess: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
