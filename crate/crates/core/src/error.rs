use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero-temperature decay rate must be positive, got {0}")]
    NonPositiveGamma0(f64),
    #[error("truncation n_max must be at least 1, got {0}")]
    BadTruncation(usize),
    #[error("number of cavities must be at least 1, got {0}")]
    BadN(usize),
    #[error("parameter `{0}` is not finite or out of range")]
    BadParameter(&'static str),
    #[error("reduced system needs {needed} nonzeros, cap is {cap}")]
    DimensionOverflow { needed: usize, cap: usize },
    #[error("singular system: pivot {pivot:e} below threshold {threshold:e}")]
    SingularSystem { pivot: f64, threshold: f64 },
    #[error("operation requires N in {expected}, got N={got}")]
    UnsupportedN { expected: &'static str, got: usize },
    #[error("density oracle dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("exponent {exponent} exceeds Fock cutoff {cutoff}")]
    ExponentExceedsCutoff { exponent: usize, cutoff: usize },
    #[error("population {0:e} too small for g2")]
    PopulationTooSmall(f64),
    #[error("moment {0} is not available in this solution")]
    MissingMoment(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
