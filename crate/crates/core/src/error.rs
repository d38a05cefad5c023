use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped so a caller (notably the CLI) can distinguish
/// configuration mistakes from input documents that fail validation.
#[derive(Debug, Error)]
pub enum Error {
    /// A document could not be deserialized at all.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    /// A document deserialized but violates a semantic rule.
    #[error("validation error: {0}")]
    Validation(String),

    /// The control-flow graph contains a directed cycle.
    #[error("workflow is not acyclic; cycle: {}", cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },

    /// A task id was referenced that does not exist in the workflow.
    #[error("unknown task id: {0}")]
    UnknownTask(String),

    /// An attack type is missing from the loaded catalog.
    #[error("unknown attack type: {0}")]
    UnknownAttack(String),

    /// An action was requested on a task that does not allow it.
    #[error("action {action} is not feasible for task {task}")]
    Infeasible { task: String, action: String },

    /// No service could be bound for a task.
    #[error("binding failed for task {task}: {reason}")]
    Binding { task: String, reason: String },

    /// Constraint filtering removed every candidate chain.
    #[error("no feasible adaptation chain for task {task}")]
    NoFeasibleChain { task: String },

    /// Exhaustive search was asked to run on a truncated chain set.
    #[error("chain set was truncated; exhaustive search would not be exact")]
    TruncatedChainSet,

    /// Bad run/train/generation parameters.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by malformed or inconsistent input documents.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::Cycle { .. }
                | Error::UnknownTask(_)
                | Error::UnknownAttack(_)
                | Error::Infeasible { .. }
        )
    }

    /// True for errors caused by bad invocation parameters.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_))
    }
}
