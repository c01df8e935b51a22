use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least 2 values, got {len}")]
    InvalidLength { len: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// sigma/mu is at or beyond sqrt(n - 1): every sequence with this
    /// profile has a non-positive term.
    #[error("no positive sequence has n = {n}, sigma/mu = {ratio} (limit sqrt(n-1) = {limit})")]
    NoPositiveSequence { n: usize, ratio: f64, limit: f64 },

    #[error("lower bound is an infimum (0) and is not attained for sigma/mu = {ratio} >= {threshold}")]
    InfimumNotAttained { ratio: f64, threshold: f64 },

    #[error("type index {i} outside 1..={max}")]
    InvalidTypeIndex { i: usize, max: usize },

    #[error("t = {t} outside [0, {limit})")]
    OutOfDomain { t: f64, limit: f64 },

    #[error("sigma = 0 has the single critical point (mu, ..., mu)")]
    DegenerateLadder,

    #[error("critical values not strictly decreasing at type {i}")]
    LadderOrder { i: usize },

    #[error("value #{index} = {value} is not positive")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("line {line}: return {value} <= -1")]
    ImpossibleReturn { line: u64, value: f64 },

    #[error("line {line}: {message}")]
    ParseError { line: u64, message: String },

    #[error("invalid robust parameters: {0}")]
    InvalidRobustParams(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidLength { .. } => "InvalidLength",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::NoPositiveSequence { .. } => "NoPositiveSequence",
            Error::InfimumNotAttained { .. } => "InfimumNotAttained",
            Error::InvalidTypeIndex { .. } => "InvalidTypeIndex",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::DegenerateLadder => "DegenerateLadder",
            Error::LadderOrder { .. } => "LadderOrder",
            Error::NonPositiveInput { .. } => "NonPositiveInput",
            Error::ImpossibleReturn { .. } => "ImpossibleReturn",
            Error::ParseError { .. } => "ParseError",
            Error::InvalidRobustParams(_) => "InvalidRobustParams",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
