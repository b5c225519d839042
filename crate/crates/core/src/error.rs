use crate::prelude::*;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite intermediate value `{0}` (inconsistent units?)")]
    NonFinite(&'static str),
    #[error("regime check `{name}` violated: {value} (expected < 1)")]
    RegimeViolated { name: String, value: f64 },
    #[error("coincident points")]
    CoincidentPoints,
    #[error("requested duration {duration} exceeds the resolvable window {window}")]
    Aliasing { duration: f64, window: f64 },
    #[error("{got} Fourier modes cover too little spectral mass (need at least {min})")]
    TooFewModes { got: usize, min: usize },
    #[error("empty source set")]
    EmptySources,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("constellation search exceeded {0} nodes")]
    SearchLimit(usize),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
