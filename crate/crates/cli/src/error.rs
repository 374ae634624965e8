use std::fmt;

use moe_core::MoeError;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(MoeError),
    Io(std::io::Error),
    /// The report was written but a numerical budget ran out.
    Budget(String),
}

impl CliError {
    /// 1 for usage and parameter errors, 2 when a numerical budget failed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Core(e) => match e {
                MoeError::InvalidParameter { .. }
                | MoeError::InvalidDistribution(_)
                | MoeError::DimensionLimit { .. } => 1,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
            CliError::Budget(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<MoeError> for CliError {
    fn from(e: MoeError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
