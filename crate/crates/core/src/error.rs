use thiserror::Error;

/// Errors raised by the mesh, operator, model and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("orientation error: {0}")]
    Orientation(String),
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("degenerate triangle {triangle}: area {area:e} below {threshold:e}")]
    Degenerate {
        triangle: usize,
        area: f64,
        threshold: f64,
    },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("vertex {0} lies on the boundary and has no trusted operator value")]
    Boundary(usize),
    #[error("field length {found} does not match {expected} samples")]
    LengthMismatch { expected: usize, found: usize },
    #[error("support violation: {0}")]
    Support(String),
    #[error("profile reached the rotation axis at s = {s:.6} (r = {r:e})")]
    AxisCrossing { s: f64, r: f64 },
    #[error("no sign change of the closure function on [{lo}, {hi}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("orbit starting at r = {r_start} did not close: {reason}")]
    NonClosing { r_start: f64, reason: String },
    #[error("surface is not a self-shrinker: residual {residual:e} exceeds {threshold:e}")]
    NotAShrinker { residual: f64, threshold: f64 },
    #[error("dimension n = {0} is outside the supported range (n >= 2)")]
    Dimension(usize),
    #[error("function must be positive; vertex {vertex} has value {value:e}")]
    Positivity { vertex: usize, value: f64 },
    #[error("variation step {step:e} folds triangle {triangle}")]
    Step { step: f64, triangle: usize },
    #[error("time step {dt:e} exceeds the explicit stability bound {bound:e}")]
    Timestep { dt: f64, bound: f64 },
    #[error("time {0} is outside the self-similar range t < 0")]
    TimeDomain(f64),
    #[error("eigensolver failed: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
