use std::path::PathBuf;

/// Errors produced anywhere in the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The message without its category prefix.
    pub fn detail(&self) -> String {
        match self {
            Error::Config(m) | Error::Input(m) | Error::Training(m) | Error::Numerical(m) => m.clone(),
            Error::Io { path, source } => format!("{}: {source}", path.display()),
        }
    }

    /// Short machine-readable tag used on the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Input(_) => "input",
            Error::Training(_) => "training",
            Error::Numerical(_) => "numerical",
            Error::Io { .. } => "io",
        }
    }
}
