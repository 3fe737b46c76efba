use thiserror::Error;

/// Errors raised by geometry, assembly and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("vertex {vertex}: height {value} is outside the flow interval (-inf, {interval_end})")]
    OutsideInterval {
        vertex: usize,
        value: f64,
        interval_end: f64,
    },

    #[error("invalid ambient space: {0}")]
    Ambient(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("scalar field does not belong to this mesh ({0})")]
    FieldMismatch(String),

    #[error("singular linear system near vertex {vertex}")]
    SingularSystem { vertex: usize },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("newton iteration stalled after {iterations} iterations (residual {residual:.3e})")]
    Stalled {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
