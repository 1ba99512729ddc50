use thiserror::Error;

/// Errors raised by the library. Contract violations are reported, never
/// silently truncated.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid Pauli string {0:?}")]
    ParsePauli(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("unsupported distance {0}: expected an odd integer in 3..=11")]
    InvalidDistance(usize),

    #[error("operator has a nonzero syndrome; apply ideal correction first")]
    NonZeroSyndrome,

    #[error("search bound exceeded: {what} is {value}, limit {limit}")]
    SearchBoundExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("illegal fault {fault} at location {location}")]
    IllegalFault { location: String, fault: String },

    #[error("location {0} is outside the round schedule")]
    UnknownLocation(usize),

    #[error("table enumeration needs {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("syndrome is inconsistent with the code")]
    InconsistentSyndrome,

    #[error("policy already stopped after round {0}")]
    PolicyStopped(usize),

    #[error("policy reached its round cap {cap} without a decision (history {delta})")]
    CapReached { cap: usize, delta: String },

    #[error("operation requires a CSS code")]
    NotCss,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change of p_L(p) - 2p/3 on [{low:e}, {high:e}]; sampled curve: {curve}")]
    NoSignChange { low: f64, high: f64, curve: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed table cache: {0}")]
    MalformedCache(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
