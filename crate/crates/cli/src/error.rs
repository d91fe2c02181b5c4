use thiserror::Error;

use crate::report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_EMPTY_CLOUD: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("generator {name}: {source}")]
    Validation {
        name: String,
        source: cheq_core::Error,
    },

    #[error("no convergence after {terms} terms (last residual {residual:.3e}); residual trace: {trace:?}")]
    Divergence {
        terms: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("Eq(G) = whole space (finite group?)")]
    EmptyCloud,

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] cheq_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cheq_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Divergence { .. } => EXIT_DIVERGENCE,
            CliError::EmptyCloud | CliError::Core(E::EmptyCloud) => EXIT_EMPTY_CLOUD,
            CliError::Core(E::Argument(_) | E::Dimension { .. } | E::Precondition(_)) => EXIT_USAGE,
            CliError::Core(_) => EXIT_VALIDATION,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// A failed command, with whatever report was assembled before the failure.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub report: Option<Box<RunReport>>,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            error: e.into(),
            report: None,
        }
    }
}
