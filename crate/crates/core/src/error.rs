use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The input document could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),

    /// The input parsed but violates an invariant of the data model.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("unknown edge {0:?}")]
    UnknownEdge(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The exact solver refuses instances whose reveal tree is too large.
    #[error("{count} uncertain edges exceed the exact-solver cap of {cap}")]
    TooManyUncertainEdges { count: usize, cap: usize },

    #[error("bad route: {0}")]
    BadRoute(String),

    #[error("incompatible options: {0}")]
    IncompatibleOptions(String),

    #[error("covariate matrix is rank deficient; dependent columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("covariance is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// A policy kept moving without gaining information or reaching the sink.
    #[error("policy exceeded its step budget of {0} moves")]
    PolicyLoop(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
