use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("overflow evaluating order {order} at x = {x:e}")]
    Overflow { order: usize, x: f64 },

    #[error("non-finite propagation for l = {l} at layer {layer}")]
    Propagation { l: usize, layer: usize },

    #[error("degenerate coefficient state (A = B = 0)")]
    DegenerateState,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("objective undefined: data phase shifts are all zero")]
    ZeroData,

    #[error("mismatched phase-shift sets: {0}")]
    Mismatch(String),

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("every local minimization failed in iteration {0}")]
    AllStartsFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
