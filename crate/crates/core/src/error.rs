use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distribution has no atoms")]
    EmptyDistribution,

    #[error("probability at index {index} is not a finite non-negative number: {value}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {0}, more than 1e-9 away from 1")]
    NotNormalized(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("logarithm base must be finite and > 1, got {0}")]
    InvalidBase(f64),

    #[error("delta must lie in [0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("mixed source has no components")]
    EmptySource,

    #[error(
        "explicit product over {alphabet} letters with n = {n} exceeds 2^24 atoms; \
         use the type-class path for binary sources"
    )]
    ProductTooLarge { alphabet: usize, n: usize },

    #[error("blocklength {n} exceeds the type-class limit of {max}")]
    BlocklengthTooLarge { n: usize, max: usize },

    #[error("blocklength must be positive")]
    ZeroBlocklength,

    #[error("type-class path needs a binary single-letter alphabet, got {0} letters")]
    NotBinary(usize),

    #[error("component {0} is not an i.i.d. component")]
    NotIid(usize),

    #[error("components disagree on blocklength: {0} vs {1}")]
    BlocklengthMismatch(usize, usize),

    #[error("grid oracle supports at most 3 components, got {0}")]
    TooManyComponents(usize),

    #[error("grid step must lie in (0, 0.1], got {0}")]
    InvalidGridStep(f64),

    #[error("coin alphabet size must be at least 2, got {0}")]
    InvalidCoinAlphabet(u32),

    #[error("slack gamma must be finite and > 0, got {0}")]
    InvalidGamma(f64),

    #[error("codeword length {m} makes K^m overflow 128-bit arithmetic")]
    LengthOverflow { m: u32 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(
        "components {0} and {1} have equal entropy; second-order formula needs a strict order"
    )]
    EntropyTie(usize, usize),

    #[error("argument must lie in the open interval (0, 1), got {0}")]
    OutOfUnitInterval(f64),

    #[error("materialized codebook limited to n <= 8 and 2^20 strings")]
    CodebookTooLarge,
}

pub type Result<T> = std::result::Result<T, Error>;
