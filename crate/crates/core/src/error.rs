use thiserror::Error;

/// Errors raised by mesh construction, the solver pipeline, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cell {cell}: degenerate geometry ({reason})")]
    DegenerateCell { cell: usize, reason: String },

    #[error("cell {cell}: inverted or zero volume ({volume:e})")]
    InvertedCell { cell: usize, volume: f64 },

    #[error("cell {cell}: node vectors near-degenerate (condition number {condition:e} > {limit:e})")]
    NearDegenerateCell { cell: usize, condition: f64, limit: f64 },

    #[error("mesh topology: {0}")]
    Topology(String),

    #[error("singular interface between cell {cell_a} face {face_a} and cell {cell_b} face {face_b}")]
    SingularInterface { cell_a: usize, face_a: usize, cell_b: usize, face_b: usize },

    #[error("singular pressure equation in cell {cell}")]
    SingularCell { cell: usize },

    #[error("pressure solve did not converge in {iterations} iterations (residual {residual:e}, target {target:e})")]
    PressureNotConverged { iterations: usize, residual: f64, target: f64 },

    #[error("non-finite {field} in cell {cell} at step {step}")]
    NonFinite { field: &'static str, cell: usize, step: usize },

    #[error("CFL number {cfl:.3} in cell {cell} exceeds limit {limit} at step {step}")]
    CflExceeded { cfl: f64, cell: usize, limit: f64, step: usize },

    #[error("no boundary rule for tag '{0}'")]
    UnknownTag(String),

    #[error("scattering history: {0}")]
    History(String),

    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig { field: field.into(), message: message.into() }
    }

    pub(crate) fn degenerate(cell: usize, reason: impl Into<String>) -> Self {
        Error::DegenerateCell { cell, reason: reason.into() }
    }
}
