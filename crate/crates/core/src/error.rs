use std::path::PathBuf;

use crate::resource::Resource;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid `{field}` on `{id}`: {message}")]
    Validation {
        id: String,
        field: String,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operating point ({power} MW, {heat} MW) is outside the feasible region of `{id}`")]
    InfeasiblePoint { id: String, power: f64, heat: f64 },

    #[error("storage cannot charge ({charge} MW) and discharge ({discharge} MW) in the same hour")]
    MutualExclusion { charge: f64, discharge: f64 },

    #[error("scenario `{scenario}` does not use the {expected} policy")]
    PolicyMismatch {
        scenario: String,
        expected: &'static str,
    },

    #[error("no scenario matches {0}")]
    EmptySet(String),

    #[error("scenario `{scenario}` hour {hour}: {resource} demand cannot be met (short by {shortfall:.6})")]
    InfeasibleDispatch {
        scenario: String,
        hour: usize,
        resource: Resource,
        shortfall: f64,
    },

    #[error("no installation subset admits a feasible dispatch")]
    Infeasible,

    #[error("iteration limit reached after {iterations} subsets without a feasible design")]
    IterationLimit { iterations: usize },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(id: &str, field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            id: id.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
