use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The point lies inside the node mask; guidance velocity and quantum
    /// potential are undefined there.
    #[error("degenerate node: |psi|^2 = {intensity:e} below mask threshold {threshold:e}")]
    DegenerateNode { intensity: f64, threshold: f64 },

    #[error("rejection sampler stalled: {accepted} accepted out of {proposals} proposals")]
    SamplerStall { accepted: usize, proposals: usize },

    #[error("no fringe: {0}")]
    NoFringe(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time stepping: {0}")]
    InvalidStep(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
