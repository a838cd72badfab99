use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema invalid:\n{}", .0.join("\n"))]
    Schema(Vec<String>),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}: row {row}, column {column}: {message}")]
    Cell { path: PathBuf, row: usize, column: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] copimp_core::Error),
    #[error("{0}")]
    Invalid(String),
}

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
