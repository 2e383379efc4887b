use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("particle count must be at least 1, got {0}")]
    InvalidParticleCount(usize),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("coefficient vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("ensemble weight {index} is negative ({weight})")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("ensemble weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("eigenpair {index} failed the residual check ({residual} > {bound})")]
    ResidualCheck { index: usize, residual: f64, bound: f64 },

    #[error("eigenvectors {i} and {j} are not orthonormal (defect {defect})")]
    OrthonormalityCheck { i: usize, j: usize, defect: f64 },

    #[error("full spectrum requested for N = {n} above the cap {cap}")]
    SpectrumCap { n: usize, cap: usize },

    #[error("temperature must be nonnegative, got {0}")]
    NegativeTemperature(f64),

    #[error("visibility is zero: squeezing and witness are undefined")]
    ZeroVisibility,

    #[error("<Jx> = 0: phase squeezing is undefined")]
    UndefinedSqueezing,

    #[error("interaction {lambda} outside the validity range of the {context}")]
    InvalidInteraction { lambda: f64, context: &'static str },

    #[error("no root: {0}")]
    NoRoot(&'static str),

    #[error("fit needs at least {min} positions, got {got}")]
    TooFewPositions { min: usize, got: usize },

    #[error("phase fit did not converge from any starting point")]
    FitFailed,

    #[error("{failed} of {total} shots failed to fit")]
    TooManyFitFailures { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
