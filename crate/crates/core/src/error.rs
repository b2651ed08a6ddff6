//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain too small for mesh: no interior vertex at delta={delta}")]
    DomainTooSmall { delta: f64 },
    #[error("jitter out of range: {0} (allowed [0, 0.3])")]
    JitterOutOfRange(f64),
    #[error("killed state has no transitions (vertex {0} is a boundary vertex)")]
    KilledState(u32),
    #[error("walk start must be an interior vertex (vertex {0})")]
    BadStart(u32),
    #[error("step cap exceeded after {0} steps (graph without boundary access?)")]
    StepCapExceeded(usize),
    #[error("index out of range: {index} not below {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("loop is not a closed edge path on this graph: {0}")]
    InvalidLoop(String),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("no killing: I - Q is singular, the walk cannot reach the boundary")]
    NoKilling,
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("polyline must be closed (first point equal to last)")]
    NotClosed,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no vertex in start ball")]
    EmptyStartBall,
    #[error("graph parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
