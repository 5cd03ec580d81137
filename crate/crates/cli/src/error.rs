use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} acceptance check(s) failed")]
    Check { failed: usize },
}

impl CliError {
    /// 1 validation, 2 I/O, 3 failed `--check`.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Check { .. } => 3,
        }
    }
}

impl From<quizsim::QuizError> for CliError {
    fn from(e: quizsim::QuizError) -> Self {
        CliError::Validation(e.to_string())
    }
}
