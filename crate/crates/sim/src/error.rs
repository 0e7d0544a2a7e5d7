use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("failed to parse config file {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("network file line {line}: {message}")]
    NetFile { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] mmbcast_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SimError {
    /// Errors caused by the user's input rather than the environment.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            SimError::Config(_)
                | SimError::ConfigFile { .. }
                | SimError::NetFile { .. }
                | SimError::Core(_)
        )
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
