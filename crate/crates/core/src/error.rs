use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid state in block {block}: {reason}")]
    InvalidState { block: usize, reason: String },

    #[error("state has total trace {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("map is not unital: deviation {deviation:e}")]
    NotUnital { deviation: f64 },

    #[error("map is not completely positive: min Choi eigenvalue {min_eig:e}")]
    NotCompletelyPositive { min_eig: f64 },

    #[error("map does not preserve the state: max deviation {deviation:e}")]
    StatePreservation { deviation: f64 },

    #[error("predual of the map is not a valid state: {0}")]
    NonCpuInput(String),

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid congruent embedding: {0}")]
    InvalidEmbedding(String),

    #[error("morphisms are not composable: middle objects differ by {deviation:e}")]
    ObjectMismatch { deviation: f64 },

    #[error("induced GNS map is ill-defined: Gelfand ideal leaks with squared norm {leakage:e}")]
    IllDefinedContraction { leakage: f64 },

    #[error("covariance kind {kind} needs a faithful state (min eigenvalue {min_eig:e})")]
    UnsupportedKind { kind: String, min_eig: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("Gaussian mass leaks outside the binning range: {leaked:e}")]
    MassLeak { leaked: f64 },

    #[error("score for parameter {parameter} is not representable (residual {residual:e})")]
    ScoreNotRepresentable { parameter: usize, residual: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
