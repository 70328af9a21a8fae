use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Each variant maps onto one of the CLI exit classes via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("gate {gate}: {message}")]
    Gate { gate: usize, message: String },

    #[error("parse error in `{input}` at byte {position}: {message}")]
    Expr {
        input: String,
        position: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("mitigation failed: {0}")]
    Mitigation(String),

    #[error("unroutable circuit: {0}")]
    Unroutable(String),

    #[error("cache log {path} line {line}: {message}")]
    CacheCorrupt {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error class: 2 config, 3 resource cap, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceCap(_) => 3,
            Error::Numeric(_) | Error::Mitigation(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn gate(gate: usize, message: impl Into<String>) -> Self {
        Error::Gate {
            gate,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
