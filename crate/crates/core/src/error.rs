use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("arm index {index} out of range for {k} arms")]
    ArmOutOfRange { index: usize, k: usize },

    #[error("pair ({i}, {j}) is not a pair of distinct arms")]
    SamePair { i: usize, j: usize },

    #[error("arm {0} has not been pulled yet")]
    Unpulled(usize),

    #[error("prior is degenerate: L(H) = {0} (arm priors do not overlap)")]
    DegeneratePrior(f64),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {value}, error {error}")]
    QuadratureDiverged { a: f64, b: f64, value: f64, error: f64 },

    #[error("cannot aggregate an empty list of trials")]
    EmptyResults,

    #[error("malformed config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
