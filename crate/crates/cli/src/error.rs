use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{module}::{operation}: {source}")]
    Core {
        module: &'static str,
        operation: &'static str,
        #[source]
        source: symspin::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed curve: {0}")]
    Input(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn core(module: &'static str, operation: &'static str) -> impl FnOnce(symspin::Error) -> Self {
        move |source| CliError::Core {
            module,
            operation,
            source,
        }
    }

    pub fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 2 for bad input, 3 for an exhausted budget, 4 for a numerical failure,
    /// 1 for a failed verification.
    pub fn exit_code(&self) -> i32 {
        use symspin::Error as E;
        match self {
            CliError::Config(_) | CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Verify(_) => 1,
            CliError::Core { source, .. } => match source {
                E::Budget { .. } => 3,
                E::InvalidArgument(_)
                | E::DimensionMismatch { .. }
                | E::Normalization { .. }
                | E::Incompatible { .. } => 2,
                E::SingularParameter(_) | E::IllConditioned(_) | E::NonConvergence { .. } | E::Numerical(_) => 4,
            },
        }
    }
}
