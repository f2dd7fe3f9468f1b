use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported observation family: {0}")]
    UnsupportedFamily(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate prior for the linear predictor: q = {0}")]
    DegeneratePrior(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("observation {index} ({value}) is outside the support of the {family} family")]
    Support {
        index: usize,
        value: f64,
        family: &'static str,
    },

    #[error("ARMS failure: {0}")]
    Arms(String),

    #[error("chain error: {0}")]
    Chain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
