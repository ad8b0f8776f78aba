use thiserror::Error;

/// Errors raised by constructions and verifications in this crate.
///
/// Mathematical outcomes that falsify a claim (a spectrum escaping its
/// predicted set, an orphan reflection) are errors here so that callers
/// cannot silently ignore them; degenerate parameters that merely skip a
/// sub-check are reported through [`crate::report`] instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid type: {0}")]
    InvalidType(String),

    #[error("operation requires type {expected}, got {got}")]
    WrongType { expected: String, got: String },

    #[error("parameter m = {0} is a pole of the construction")]
    PoleParameter(String),

    #[error("prime {p} is not admissible: {reason}")]
    BadPrime { p: u64, reason: String },

    #[error("generator size mismatch: expected {expected}x{expected} over F_{p}, got {got}x{got} over F_{q}")]
    SizeMismatch {
        expected: usize,
        got: usize,
        p: u64,
        q: u64,
    },

    #[error("spectrum escapes {{3, -3, 0, m}}: multiplicities sum to {found} of {expected}")]
    SpectrumEscape { found: usize, expected: usize },

    #[error("reflection {0} commutes with none of the triple")]
    OrphanReflection(usize),

    #[error("no commuting pair of simple reflections: {0}")]
    NoCommutingPair(String),

    #[error("discriminant does not split over the integers: residual degree {0}")]
    NonIntegerRoot(usize),

    #[error("folded generator {generator} does not preserve the {block} eigenspace")]
    StabilityFailure { generator: usize, block: String },

    #[error("selector {selector} is not valid for {type_string}")]
    InvalidSelector {
        selector: String,
        type_string: String,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
