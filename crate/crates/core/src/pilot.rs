//! Sinusoidal pilot tone and the coherent-sampling rules it must satisfy.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Relative slack when deciding that `f_s / f_d * n_periods` is an integer.
const INTEGER_TOLERANCE: f64 = 1e-9;

/// A burst of `n_periods` full pilot periods, `-v_d * sin(2 pi f_d t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    /// Amplitude in volts.
    pub v_d: f64,
    /// Frequency in hertz.
    pub f_d: f64,
    /// Chosen initial phase in radians.
    pub phi_0: f64,
    pub n_periods: u32,
}

impl PilotConfig {
    pub fn new(v_d: f64, f_d: f64, phi_0: f64, n_periods: u32) -> Result<Self> {
        if !(v_d >= 0.0 && v_d.is_finite()) {
            return Err(invalid("v_d", format!("must be non-negative, got {v_d}")));
        }
        if !(f_d > 0.0 && f_d.is_finite()) {
            return Err(invalid("f_d", format!("must be positive, got {f_d}")));
        }
        if !phi_0.is_finite() {
            return Err(invalid("phi_0", format!("must be finite, got {phi_0}")));
        }
        if n_periods == 0 {
            return Err(invalid("n_periods", "must be at least 1"));
        }
        Ok(Self {
            v_d,
            f_d,
            phi_0,
            n_periods,
        })
    }

    /// Burst duration `T_d = n_periods / f_d` in seconds.
    pub fn duration(&self) -> f64 {
        f64::from(self.n_periods) / self.f_d
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f_d
    }

    /// Amplitude relative to the half-wave voltage.
    pub fn normalized_amplitude(&self, v_pi: f64) -> NormalizedAmplitude {
        NormalizedAmplitude(self.v_d / v_pi)
    }

    /// Same burst with the amplitude replaced by `f * v_pi`.
    pub fn with_normalized_amplitude(self, f: NormalizedAmplitude, v_pi: f64) -> Self {
        Self {
            v_d: f.0 * v_pi,
            ..self
        }
    }
}

/// Pilot amplitude normalized to the half-wave voltage, `F = V_d / V_pi`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedAmplitude(f64);

impl NormalizedAmplitude {
    pub fn new(f: f64) -> Result<Self> {
        if f >= 0.0 && f.is_finite() {
            Ok(Self(f))
        } else {
            Err(invalid("F", format!("must be non-negative and finite, got {f}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// DFT length and harmonic bin positions for a validated burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub n_dft: usize,
    /// Bin of the fundamental, `N_DFT * f_d / f_s`.
    pub bin_1f: usize,
    /// Bin of the second harmonic.
    pub bin_2f: usize,
}

pub fn pilot_waveform(cfg: &PilotConfig, phi_d: f64, t: f64) -> f64 {
    -cfg.v_d * (cfg.omega() * t + phi_d).sin()
}

pub fn compose_control_voltage(v_hat_min: f64, pilot: f64) -> f64 {
    v_hat_min + pilot
}

/// Checks that a burst is coherently sampled with both harmonics below
/// Nyquist, returning the DFT length and harmonic bins.
pub fn validate_sampling(cfg: &PilotConfig, f_s: f64) -> Result<SamplingPlan> {
    if !(f_s > 0.0 && f_s.is_finite()) {
        return Err(invalid("f_s", format!("must be positive and finite, got {f_s}")));
    }
    // The highest tone of interest sits at 2 f_d.
    if f_s <= 4.0 * cfg.f_d {
        return Err(Error::NyquistViolation { f_s, f_d: cfg.f_d });
    }
    let ratio = f_s / cfg.f_d;
    let samples = ratio * f64::from(cfg.n_periods);
    let n_dft = samples.round();
    if (samples - n_dft).abs() > INTEGER_TOLERANCE * samples.max(1.0) {
        return Err(Error::NonIntegerPeriods {
            n_periods: cfg.n_periods,
            ratio,
        });
    }
    let n_dft = n_dft as usize;
    let bin_1f = cfg.n_periods as usize;
    let bin_2f = 2 * bin_1f;
    // Implied by f_s > 4 f_d, restated on the integers.
    debug_assert!(2 * bin_2f < n_dft);
    Ok(SamplingPlan {
        n_dft,
        bin_1f,
        bin_2f,
    })
}
