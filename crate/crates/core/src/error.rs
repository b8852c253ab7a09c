use thiserror::Error;

/// Errors raised by the geometry, prox, solver and certification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the domain of the prox function: {0}")]
    Domain(String),

    #[error("unsupported combination: {0}")]
    Capability(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The prox center minimizes the linear model over the set, so the
    /// dual step equation has no positive solution.
    #[error("point is directionally optimal for the current subgradient")]
    DirectionallyOptimal,

    #[error("zero subgradient at a non-optimal point")]
    ZeroSubgradient,

    #[error("dual step function stayed below target {target} after bracket expansion")]
    UnboundedPhi { target: f64 },

    #[error("level set is empty: {0}")]
    InfeasibleLevel(String),

    #[error("horizon {horizon} is shorter than the minimum {minimum}")]
    HorizonTooShort { horizon: usize, minimum: usize },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("unknown gallery problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("dual certificate unavailable: {0}")]
    CertificateUnavailable(String),

    #[error("point is not a Slater point: {0}")]
    NotSlater(String),

    #[error("scalar root search failed: {0}")]
    RootSearch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
