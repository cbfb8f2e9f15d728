use std::path::PathBuf;

use gvm_core::GvmError;

/// Errors of the file-facing layer. Each maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("training did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Core(#[from] GvmError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::Data(_) | Error::Io { .. } => EXIT_DATA,
            Error::NonConvergence(_) => EXIT_NON_CONVERGENCE,
            Error::Core(e) => match e {
                GvmError::AllMembersFailed(_) | GvmError::ScheduleExhausted => EXIT_NON_CONVERGENCE,
                GvmError::InvalidControl(_)
                | GvmError::CostMismatch { .. }
                | GvmError::SensitivityTooCostly { .. }
                | GvmError::NonSmoothGoal(_)
                | GvmError::TooManyRequested { .. } => EXIT_CONFIG,
                _ => EXIT_DATA,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::Data("x".into()).exit_code(), 3);
        assert_eq!(Error::NonConvergence("x".into()).exit_code(), 4);
        assert_eq!(Error::from(GvmError::AllMembersFailed(3)).exit_code(), 4);
        assert_eq!(Error::from(GvmError::InvalidControl("c")).exit_code(), 2);
        assert_eq!(Error::from(GvmError::EmptyInput).exit_code(), 3);
    }
}
