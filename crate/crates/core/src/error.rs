use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),

    #[error("invalid image catalog: {0}")]
    InvalidCatalog(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inapplicable action {action}: {reason}")]
    InapplicableAction { action: String, reason: String },

    #[error("unsatisfiable operator {0}: no image in the catalog carries all of its tags")]
    UnsatisfiableOperator(String),

    #[error("no plan reaches the goal")]
    NoPlan,

    #[error("instance too large for oracle: {operators} operators exceeds cap {cap}")]
    TooLargeForOracle { operators: usize, cap: usize },

    #[error("unsatisfiable: no feasible grouping exists")]
    Unsatisfiable,

    #[error("default baseline infeasible: no single image satisfies every operator")]
    DefaultInfeasible,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0} is not a fibonacci operator")]
    NotFibonacci(String),

    #[error("plan line {line}: {message}")]
    PlanLine { line: usize, message: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("pddl naming: {0}")]
    PddlName(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
