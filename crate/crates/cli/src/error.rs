use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Core(#[from] jellium::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 inadmissible, 4 sampling budget, 5 internal.
    pub fn exit_code(&self) -> i32 {
        use jellium::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(E::InadmissibleGas { .. }) => 3,
            CliError::Core(E::MaxAttemptsExceeded { .. }) => 4,
            CliError::Core(
                E::InvalidBackground(_)
                | E::NonIntegrableBackground
                | E::ChargeMismatch { .. }
                | E::InvalidParameter(_)
                | E::IndexOutOfRange { .. }
                | E::DepthTooSmall { .. }
                | E::WindowTooDeep { .. },
            ) => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Internal(_) => 5,
        }
    }
}
