//! Photodetector chain: linear opto-electric conversion, additive white
//! Gaussian noise at the sampling rate, and compensation of the
//! pilot-to-feedback propagation delay.
//!
//! Noise is drawn directly at `f_s` with the variance an ideal brick-wall
//! anti-alias filter at `f_s / 2` would leave, `sigma_n^2 = S_0 * f_s / 2`.
//! Gaussian draws come from ChaCha20 seeded with `seed_from_u64(seed)`, so a
//! seed fully determines a trace.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eom::{optical_output_power, EomParams};
use crate::error::{invalid, Error, Result};
use crate::pilot::{compose_control_voltage, validate_sampling, PilotConfig};

const INTEGER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Opto-electric conversion factor in V/W.
    pub c: f64,
    /// One-sided noise power spectral density in V^2/Hz.
    pub s_0: f64,
    /// Sampling frequency in hertz.
    pub f_s: f64,
    /// Propagation delay between pilot and detector output in seconds.
    pub delta_tau: f64,
}

impl DetectorConfig {
    pub fn new(c: f64, s_0: f64, f_s: f64, delta_tau: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", format!("must be positive and finite, got {c}")));
        }
        if !(s_0 >= 0.0 && s_0.is_finite()) {
            return Err(invalid("s_0", format!("must be non-negative, got {s_0}")));
        }
        if !(f_s > 0.0 && f_s.is_finite()) {
            return Err(invalid("f_s", format!("must be positive, got {f_s}")));
        }
        if !(delta_tau >= 0.0 && delta_tau.is_finite()) {
            return Err(invalid("delta_tau", format!("must be non-negative, got {delta_tau}")));
        }
        Ok(Self {
            c,
            s_0,
            f_s,
            delta_tau,
        })
    }

    /// Per-sample noise variance `S_0 * f_s / 2`.
    pub fn noise_variance(&self) -> f64 {
        self.s_0 * self.f_s / 2.0
    }

    /// The propagation delay as a whole number of sample periods.
    pub fn delay_samples(&self) -> Result<usize> {
        let exact = self.delta_tau * self.f_s;
        let whole = exact.round();
        if (exact - whole).abs() > INTEGER_TOLERANCE * exact.max(1.0) {
            return Err(Error::FractionalDelay {
                delta_tau: self.delta_tau,
                f_s: self.f_s,
            });
        }
        Ok(whole as usize)
    }
}

/// Sampled detector voltages on the delay-compensated time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrace {
    pub samples: Vec<f64>,
    pub f_s: f64,
    /// Time of the first sample on the compensated axis, seconds.
    pub t0: f64,
}

impl SampledTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            ..self.clone()
        }
    }

    /// Copy with `offset` added to every sample.
    pub fn offset(&self, offset: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s + offset).collect(),
            ..self.clone()
        }
    }
}

/// Pilot phase accumulated over a propagation delay, `delta_tau * 2 pi f_d`.
pub fn phase_from_delay(delta_tau: f64, f_d: f64) -> f64 {
    delta_tau * 2.0 * PI * f_d
}

fn add_noise(samples: &mut [f64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for s in samples.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *s += sigma * z;
    }
}

/// Converts optical power samples to noisy detector voltages.
pub fn detect(power_samples: &[f64], cfg: &DetectorConfig, seed: u64) -> Result<SampledTrace> {
    if power_samples.is_empty() {
        return Err(invalid("power_samples", "must not be empty"));
    }
    let mut samples: Vec<f64> = power_samples.iter().map(|p| cfg.c * p).collect();
    add_noise(&mut samples, cfg.noise_variance().sqrt(), seed);
    Ok(SampledTrace {
        samples,
        f_s: cfg.f_s,
        t0: 0.0,
    })
}

/// Simulates one pilot burst through the exact modulator model and the
/// detector, returning the trace realigned so the pilot phase seen by the
/// estimator is `pilot.phi_0`.
///
/// The raw detector record starts when the pilot is switched on and runs
/// `delay + N_DFT` samples; the detector sees the modulator output `delay`
/// samples late, with the bias alone before the pilot starts. Compensation
/// discards the leading `delay` samples.
pub fn simulate_burst(
    eom: &EomParams,
    pilot: &PilotConfig,
    detector: &DetectorConfig,
    v_hat_min: f64,
    seed: u64,
) -> Result<SampledTrace> {
    let plan = validate_sampling(pilot, detector.f_s)?;
    let delay = detector.delay_samples()?;
    let omega = pilot.omega();
    let power: Vec<f64> = (0..delay + plan.n_dft)
        .map(|j| {
            // Emission time of the light reaching the detector at sample j.
            let lag = j as i64 - delay as i64;
            let v_pilot = if lag < 0 {
                0.0
            } else {
                let t = lag as f64 / detector.f_s;
                -pilot.v_d * (omega * t + pilot.phi_0).sin()
            };
            optical_output_power(eom, compose_control_voltage(v_hat_min, v_pilot))
        })
        .collect();
    let mut raw = detect(&power, detector, seed)?;
    raw.samples.drain(..delay);
    Ok(raw)
}
