use thiserror::Error;

/// Errors raised by every module of the toolkit.
///
/// The CLI maps each variant onto a distinct process exit code, see
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded { what: String, value: u128, cap: u128 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("retries exhausted after {attempts} attempts: {reason}")]
    RetriesExhausted { attempts: u32, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::InvalidDistribution(_)
            | Error::InvalidInput(_)
            | Error::Io(_)
            | Error::Parse(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::Infeasible(_) => 4,
            Error::RetriesExhausted { .. } => 5,
        }
    }

    /// Short machine-parseable tag used on the CLI's one-line error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::InvalidInput(_) => "invalid-input",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::Infeasible(_) => "infeasible",
            Error::RetriesExhausted { .. } => "retries-exhausted",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn cap(what: &str, value: impl TryInto<u128>, cap: impl TryInto<u128>) -> Self {
        Error::CapExceeded {
            what: what.to_string(),
            value: value.try_into().unwrap_or(u128::MAX),
            cap: cap.try_into().unwrap_or(u128::MAX),
        }
    }
}

pub(crate) fn check_dims(what: &str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch(format!("{what}: {left} != {right}")));
    }
    Ok(())
}
