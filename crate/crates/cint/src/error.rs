use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate key `{key}` on lines {first} and {second}")]
    Duplicate { key: String, first: usize, second: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("line {line}: invalid `{key}`: {message}")]
    Invalid { key: String, line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage `{stage}` failed: {source}")]
    Stage { stage: &'static str, source: cint_core::Error },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}, line {line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("reconstruction is empty: no constellation matches the estimated offsets")]
    EmptyReconstruction,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Stage { .. } | CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::EmptyReconstruction => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

/// Attaches a stage name to core errors.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for cint_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
