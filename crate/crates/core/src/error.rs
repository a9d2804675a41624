use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A coefficient index or band reaches past the model's eigenbasis.
    #[error("model truncation: {0}")]
    Truncation(String),

    #[error("point is not on the manifold: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Sampling hypothesis (spacing vs bandwidth) does not hold.
    #[error("sampling hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("lattice too coarse for band: weight {index} = {weight:.3e} is not positive (r*omega = {r_omega:.4})")]
    NonPositiveWeight { index: usize, weight: f64, r_omega: f64 },

    #[error("cubature exactness insufficient: {0}")]
    Exactness(String),

    #[error("ill-conditioned frame operator: {0}")]
    Conditioning(String),

    #[error("window leakage {leakage:.3e} exceeds tolerance {tol:.3e}")]
    Leakage { leakage: f64, tol: f64 },

    #[error("empty frame")]
    EmptyFrame,

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
