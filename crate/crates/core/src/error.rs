use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("size cap exceeded: {what} = {value} (cap {cap})")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid vertex: layer {layer}, index {index}")]
    InvalidVertex { layer: usize, index: usize },

    #[error("retry budget exhausted after {attempts} attempts: {detail}")]
    RetryBudgetExhausted { attempts: usize, detail: String },

    #[error("exact arithmetic overflow in {0}")]
    ExactOverflow(&'static str),

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("linear program: {0}")]
    Lp(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected, got })
        }
    }

    /// True for errors that report a resource cap rather than bad input.
    pub fn is_size_cap(&self) -> bool {
        matches!(self, Error::SizeCap { .. } | Error::ExactOverflow(_))
    }
}
