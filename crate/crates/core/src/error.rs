use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown material `{name}` (available: {})", available.join(", "))]
    MaterialNotFound { name: String, available: Vec<String> },

    /// The request exceeds a configured cost guard.
    #[error("capability error: {0}")]
    Capability(String),

    /// A quadrature did not reach its tolerance within the subdivision budget.
    #[error("numerical failure: {message} (partial estimate {partial:e}, error estimate {error_estimate:e})")]
    Numerical {
        message: String,
        partial: f64,
        error_estimate: f64,
    },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("material data {source_name}, line {line}: {message}")]
    DataFile {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
