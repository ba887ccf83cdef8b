use crate::classify::ClassId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("node {node} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("unknown class {0}")]
    UnknownClass(ClassId),

    #[error("missing local importance vector for class {0}")]
    MissingLocal(ClassId),

    #[error("class/graph mismatch: {0}")]
    Mismatch(String),

    #[error("{}solver did not converge after {iterations} iterations (residual {residual:e})",
        class.map(|c| format!("class {c}: ")).unwrap_or_default())]
    Convergence {
        class: Option<ClassId>,
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("insufficient data: {found} sojourn episodes, need at least {required}")]
    InsufficientData { found: usize, required: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Attaches a class id to a convergence failure that lacks one.
    pub(crate) fn in_class(self, id: ClassId) -> Self {
        match self {
            Error::Convergence {
                class: None,
                iterations,
                residual,
                last_iterate,
            } => Error::Convergence {
                class: Some(id),
                iterations,
                residual,
                last_iterate,
            },
            other => other,
        }
    }
}
