use std::path::Path;

pub type Result<T> = core::result::Result<T, CliError>;

/// Anything the binary can fail with, carrying the exit code contract:
/// usage and parse problems exit 2, verification failures exit 1, numeric
/// aborts inside the engine exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed input file; points at the offending line.
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    /// Bad flag combination or value outside what the command accepts.
    #[error("{0}")]
    Usage(String),

    /// File-system trouble on a named path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A verifier reached a verdict and the verdict is "no".
    #[error("verification failed: {0}")]
    Verification(String),

    /// The engine aborted a computation.
    #[error(transparent)]
    Engine(#[from] lcgrid::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Verification(_) => 1,
            // Caller mistakes surface as usage errors even when detected
            // inside the engine; everything else is a numeric abort.
            CliError::Engine(e) => match e {
                lcgrid::Error::BadArgument(_) | lcgrid::Error::PlanMismatch(_) => 2,
                _ => 3,
            },
        }
    }
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}
