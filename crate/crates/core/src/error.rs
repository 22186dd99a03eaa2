use thiserror::Error;

/// Errors raised by parameter validation, simulation and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sampling rate {f_s} Hz must exceed 4 x pilot frequency {f_d} Hz")]
    NyquistViolation { f_s: f64, f_d: f64 },

    #[error("burst of {n_periods} pilot periods at f_s/f_d = {ratio} does not span an integer number of samples")]
    NonIntegerPeriods { n_periods: u32, ratio: f64 },

    #[error("propagation delay {delta_tau} s is not an integer number of sample periods at {f_s} Hz")]
    FractionalDelay { delta_tau: f64, f_s: f64 },

    #[error("DFT bin {bin} out of range for {len} samples")]
    BinOutOfRange { bin: usize, len: usize },

    #[error("second-harmonic bin {value:e} is below the degeneracy threshold {threshold:e}; pilot too small or absent")]
    DegenerateDenominator { value: f64, threshold: f64 },

    #[error("mean of the ratio denominator is zero")]
    ZeroDenominatorMean,

    #[error("need at least {required} valid trials, got {valid} ({excluded} excluded)")]
    TooFewTrials {
        required: usize,
        valid: usize,
        excluded: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
