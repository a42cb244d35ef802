use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] jostspec::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(
                jostspec::Error::Validation(_)
                | jostspec::Error::Coefficient { .. }
                | jostspec::Error::SingularCoefficient { .. }
                | jostspec::Error::NoAdmissibleInterval { .. },
            ) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }

    /// One-line JSON record for standard error.
    pub fn record(&self) -> String {
        serde_json::to_string(&ErrorRecord {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error record serializes")
    }
}
