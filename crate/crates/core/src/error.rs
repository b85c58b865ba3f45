use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("efficiency undefined: {0}")]
    UndefinedEfficiency(String),

    /// The free parameter would have to take a negative (or otherwise
    /// unreachable) value. `deficit` is how far the fixed rates fall short.
    #[error("infeasible matching for `{parameter}`: deficit {deficit:e}")]
    InfeasibleMatching { parameter: String, deficit: f64 },

    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    #[error("sweep point {envelope} at delta_omega = {delta_omega:e} failed: {source}")]
    SweepPoint {
        envelope: String,
        delta_omega: f64,
        source: Box<Error>,
    },
}

impl Error {
    /// The underlying error, looking through sweep-point wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::SweepPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
