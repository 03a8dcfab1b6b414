use thiserror::Error;

/// Errors raised by the samplers, potentials and statistical checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible gas: alpha = {alpha} must exceed n - 1 = {} (the Gibbs measure exists if and only if alpha > n - 1)", *n as f64 - 1.0)]
    InadmissibleGas { n: usize, alpha: f64 },

    #[error("invalid background: {0}")]
    InvalidBackground(String),

    #[error("background has a divergent first absolute moment")]
    NonIntegrableBackground,

    #[error("background charge {background} does not match gas charge {gas}")]
    ChargeMismatch { background: f64, gas: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("density exp(-beta V) is not normalizable: {0}")]
    NonNormalizableDensity(String),

    #[error("positions are not sorted in descending order")]
    UnsortedInput,

    #[error("sampling budget of {attempts} attempts exhausted ({accepted} accepted)")]
    MaxAttemptsExceeded { attempts: u64, accepted: u64 },

    #[error("conditioning depth {depth} is smaller than k = {k}")]
    DepthTooSmall { depth: usize, k: usize },

    #[error("tail window too deep: survival {survival:e} leaves fewer than {min_points} samples beyond t_hi with {count} samples")]
    WindowTooDeep {
        survival: f64,
        count: usize,
        min_points: usize,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("sample contains NaN")]
    NotANumber,

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
