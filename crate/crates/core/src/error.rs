use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("grid resolution {have} is too coarse, need at least {need}")]
    InsufficientResolution { have: u32, need: u32 },

    #[error("no exact sampler for 2^{n} increments: {reason}")]
    NoExactSampler { n: u32, reason: &'static str },

    #[error("Hölder bound violated between points {i} and {j}: |Δf| = {lhs} > {rhs}")]
    HolderViolation { i: usize, j: usize, lhs: f64, rhs: f64 },

    #[error("{what} needs {need} entries, cap is {cap}")]
    CapExceeded { what: &'static str, need: u128, cap: u128 },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("waiting times sum to {sum}, below the horizon {horizon}")]
    InsufficientWaitingTimes { sum: u128, horizon: u64 },
}

pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidParameter { name, detail: detail.into() }
}
