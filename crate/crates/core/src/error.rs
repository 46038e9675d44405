use thiserror::Error;

use crate::diagram::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("no interpretation for symbol `{0}`")]
    MissingSymbol(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("acceptance probability not separated from zero; certified upper bound {upper_bound}")]
    UnresolvedAcceptance { upper_bound: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
