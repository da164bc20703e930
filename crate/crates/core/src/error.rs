use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid stable parameters: {0}")]
    InvalidParams(String),

    #[error("moment order p = {p} must lie in (0, alpha = {alpha})")]
    MomentOrder { p: f64, alpha: f64 },

    #[error("power p = {p} must exceed alpha / 2 = {half_alpha}")]
    BelowHalfAlpha { p: f64, half_alpha: f64 },

    #[error("no stable limit for Gaussian driving noise (alpha = 2)")]
    GaussianLimit,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "series of length {len} is too short for blocks of {n} points (need at least {needed})"
    )]
    SeriesTooShort { len: usize, n: usize, needed: usize },

    #[error("{m} blocks is below the minimum of {min} needed for a usable empirical CDF")]
    TooFewBlocks { m: usize, min: usize },

    #[error("distance surface is not finite at C = {c}, p = {p}")]
    NonFiniteSurface { c: f64, p: f64 },

    #[error("infeasible grid: {0}")]
    InfeasibleGrid(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
