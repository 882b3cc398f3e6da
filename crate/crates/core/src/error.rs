use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {found} values but the grid has {expected} interior nodes")]
    GridMismatch { expected: usize, found: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} exceeds the explicit stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("linear system is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("active-set iteration cycled after {0} iterations")]
    Cycling(usize),

    #[error("no active set satisfies the KKT conditions")]
    NoKktPoint,

    #[error("equilibrium polish failed: {0}")]
    EquilibriumDivergence(String),

    #[error("preset error: {0}")]
    Preset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}
