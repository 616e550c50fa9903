use thiserror::Error;

pub type Result<T, E = IvemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IvemError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The interface crosses an element in a configuration the method does not handle
    /// (more than two cut points, or an edge crossed twice).
    #[error("interface assumption violated in triangle {triangle}: {detail}")]
    AssumptionViolation { triangle: usize, detail: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl IvemError {
    /// True for failures of the numerics (solver breakdown, loss of definiteness)
    /// rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, IvemError::Solver(_) | IvemError::Geometry(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-finite value encountered after {iterations} iterations")]
    NonFinite { iterations: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("system too large for the dense solver ({n} > {max})")]
    TooLarge { n: usize, max: usize },
}
