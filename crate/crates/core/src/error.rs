use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped so the CLI can map them onto exit codes: data and
/// structural problems are recoverable user errors, numerical failures are
/// not.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("quadrature did not converge within {subdivisions} subdivisions (best estimate {estimate:.6e}, error {error:.2e})")]
    QuadratureAccuracy {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },

    #[error("degenerate allocation: motif {motif} of subject {subject} in study {study} has count {count} but all signature rates underflowed")]
    DegenerateAllocation {
        study: usize,
        motif: usize,
        subject: usize,
        count: u64,
    },

    #[error("numerical failure in sweep {sweep}, step {step}: {source}")]
    Sweep {
        sweep: usize,
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for conditions caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Structure(_)
                | Error::Parse { .. }
                | Error::Data(_)
                | Error::Io { .. }
                | Error::Checkpoint(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
