use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("decision table is empty")]
    EmptyTable,

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("{count} condition attributes exceed the exhaustive search cap of {cap}; use the greedy search")]
    Capacity { count: usize, cap: usize },

    #[error("planted rule `{rule}`: {reason}")]
    InfeasibleRule { rule: String, reason: String },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("rate undefined: no {0} samples")]
    UndefinedRate(&'static str),

    #[error("AUC undefined: labels contain a single class")]
    UndefinedAuc,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("data is missing model attributes: {}", .0.join(", "))]
    SchemaMismatch(Vec<String>),

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
