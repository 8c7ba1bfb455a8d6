use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coin dimension must be at least {min}, got {got}")]
    CoinDimension { got: usize, min: usize },

    #[error("target node {target} out of range for {nodes} nodes")]
    TargetOutOfRange { target: usize, nodes: usize },

    #[error("iteration count must be positive")]
    ZeroIterations,

    #[error("coin matrix is not unitary (max deviation {deviation:e})")]
    NonUnitaryCoin { deviation: f64 },

    #[error("coin matrix is {got}x{got}, state expects {expected}x{expected}")]
    CoinShape { got: usize, expected: usize },

    #[error("alpha is indeterminate where sin(2 phi) vanishes (phi = {phi})")]
    IndeterminateAlpha { phi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "least-squares fit is underdetermined: {usable} usable points, need at least {needed}"
    )]
    Underdetermined { usable: usize, needed: usize },

    #[error("ridge extraction produced no points")]
    EmptyRidge,

    #[error("dataset is not a grid dataset")]
    NotGrid,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
