use thiserror::Error;

/// Errors surfaced by the toolkit. The CLI maps `BudgetExceeded` to exit
/// code 2 and everything else to exit code 1.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension {requested} exceeds cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("matrix is not Hermitian: {0}")]
    Symmetry(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("schedule constraint violated: {0}")]
    ScheduleInfeasible(String),

    #[error("iteration budget exceeded in {0}")]
    BudgetExceeded(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("parse error at line {line} column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for CoreError {
    fn from(e: serde_json::Error) -> Self {
        CoreError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
