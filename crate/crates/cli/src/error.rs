use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("unknown key {key:?} in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("missing required config key {0}")]
    MissingKey(String),
    #[error("output directory {0} is not empty (use --force to overwrite)")]
    OutputExists(PathBuf),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] boussinesq_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for validation problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            CliError::Io { .. } | CliError::Failed(_) => 2,
            _ => 1,
        }
    }
}
