use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no {dim}D quadrature rule of degree {degree} (supported: 1..={max})")]
    UnsupportedDegree { dim: usize, degree: usize, max: usize },

    #[error("point {point:?} lies outside the unit domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("run on grid {grid} failed: {source}")]
    Grid {
        grid: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("function is not zero on the boundary: g{point:?} = {value:.3e}")]
    NonHomogeneousBoundary { point: Vec<f64>, value: f64 },

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
