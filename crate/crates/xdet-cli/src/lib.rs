//! Library surface behind the `xdet` binary; exposed so the end-to-end
//! tests can drive commands in-process.

pub mod commands;
pub mod formats;

/// Stable process exit codes.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const INPUT_ERROR: i32 = 2;
}

/// Command failure, split by which exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    /// Unreadable or malformed inputs (exit 2).
    #[error("{0}")]
    Input(#[from] anyhow::Error),
    /// A verification suite failed (exit 1).
    #[error("check failed: {0}")]
    Check(String),
}

pub type CmdResult<T> = Result<T, CmdError>;

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => exit_code::INPUT_ERROR,
            CmdError::Check(_) => exit_code::CHECK_FAILED,
        }
    }
}
