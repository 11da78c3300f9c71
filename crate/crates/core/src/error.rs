use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cone of dimension 0")]
    ZeroDimension,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no member of the representing set charges block {block} at time {t}")]
    NoChargingMember { t: usize, block: usize },

    #[error("stopping-time enumeration would produce {count} elements, above the cap of {cap} (raise it with --cap or CONERISK_CAP)")]
    EnumerationCap { cap: u64, count: u64 },

    #[error("pasting undefined at atom {atom}: the first density charges the stopping block but the second does not")]
    UndefinedPasting { atom: usize },

    #[error("claim is not predictably representable: {0}")]
    NotRepresentable(String),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("internal theorem violation: {0}")]
    TheoremViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
