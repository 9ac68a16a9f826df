use gkp_core::GkpError;
use thiserror::Error;

pub const OK: u8 = 0;
pub const VERIFY: u8 = 1;
pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const COMPUTE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0} check(s) failed")]
    VerifyFailed(usize),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Compute(#[from] GkpError),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => VERIFY,
            CliError::Usage(_) => USAGE,
            CliError::Io(_) => IO,
            CliError::Compute(_) => COMPUTE,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
