use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Invalid arguments: mismatched dimensions, unknown names, bad orders.
    #[error("usage error: {0}")]
    Usage(String),

    /// A system cannot provide the derivative order a computation needs.
    #[error("capability error: {0}")]
    Capability(String),

    /// A nonlinear solve failed to converge or hit a singular Jacobian.
    #[error("solver error: {message} (after {iterations} iterations, residual {residual:e})")]
    Solver {
        message: String,
        iterations: usize,
        residual: f64,
    },

    /// The reference oracle could not produce a trustworthy value.
    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>, iterations: usize, residual: f64) -> Self {
        Error::Solver {
            message: msg.into(),
            iterations,
            residual,
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Capability(_) | Error::Io(_) => 2,
            Error::Solver { .. } | Error::Oracle(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
