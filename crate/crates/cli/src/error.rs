use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("run failed: {0}")]
    Run(String),

    #[error("{0}")]
    Core(#[from] lzdeph::error::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
