use std::path::PathBuf;

use subsphere_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const HYPOTHESIS: u8 = 3;
    pub const IO: u8 = 4;
    pub const NUMERICAL: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", .0.iter().map(|m| format!("  - {m}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),

    #[error("{0}")]
    Hypothesis(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}:{line}: {msg}", path.display())]
    Format { path: PathBuf, line: usize, msg: String },

    #[error("{0}")]
    Numerical(String),

    #[error("verification failed: {0} check(s) did not pass")]
    Verify(usize),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(vec![msg.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Hypothesis(_) => exit::HYPOTHESIS,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Numerical(_) | CliError::Verify(_) => exit::NUMERICAL,
        }
    }
}

/// Core errors raised by bad parameters are configuration errors; the rest
/// are numerical failures of the pipeline.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain { .. }
            | CoreError::UnsupportedDimension(_)
            | CoreError::InvalidIndex { .. }
            | CoreError::GridMismatch(_)
            | CoreError::DegreeTooHigh { .. }
            | CoreError::Strip(_)
            | CoreError::Nyquist { .. }
            | CoreError::ContourAliasing { .. } => CliError::config(e.to_string()),
            CoreError::NorthPoleSingular { .. } | CoreError::InterpolationRange { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
