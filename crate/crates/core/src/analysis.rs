//! Closed-form error analysis of the harmonic-ratio estimator.
//!
//! The estimate is a ratio of two independent Gaussians: the scaled
//! imaginary first-harmonic bin over the scaled real second-harmonic bin.
//! Their moments follow from the Taylor model and the noise PSD, and the
//! variance of the ratio is taken from its first-order normal approximation.

use std::f64::consts::PI;

use crate::detector::DetectorConfig;
use crate::eom::{optical_output_power, EomParams};
use crate::error::{Error, Result};
use crate::pilot::NormalizedAmplitude;

/// Means and variances of the estimator's numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mu_num: f64,
    pub mu_den: f64,
    pub var_num: f64,
    pub var_den: f64,
}

/// Predicted variance of the normalized offset estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePrediction {
    pub sigma2: f64,
    pub sigma: f64,
}

impl VariancePrediction {
    fn from_variance(sigma2: f64) -> Self {
        Self {
            sigma2,
            sigma: sigma2.sqrt(),
        }
    }
}

/// Moments for a burst of duration `t_d` at an offset of `delta_v` volts.
pub fn moment_set(
    eom: &EomParams,
    detector: &DetectorConfig,
    f: NormalizedAmplitude,
    t_d: f64,
    delta_v: f64,
) -> MomentSet {
    let f = f.get();
    let mu_den = -PI * PI / 2.0 * detector.c * eom.p_in * eom.f_ib * f * f;
    MomentSet {
        mu_num: mu_den * delta_v / eom.v_pi,
        mu_den,
        var_num: f * f * detector.s_0 / (4.0 * t_d),
        var_den: 4.0 * detector.s_0 / t_d,
    }
}

/// Normal approximation of the ratio variance,
/// `mu_num^2 / mu_den^2 * (var_num / mu_num^2 + var_den / mu_den^2)`.
///
/// Evaluated in expanded form so that `mu_num = 0` is well defined.
pub fn ratio_variance_approx(m: &MomentSet) -> Result<f64> {
    if m.mu_den == 0.0 {
        return Err(Error::ZeroDenominatorMean);
    }
    let den2 = m.mu_den * m.mu_den;
    Ok(m.var_num / den2 + m.mu_num * m.mu_num * m.var_den / (den2 * den2))
}

/// Closed-form variance of the normalized offset estimate,
/// `1/T_d * S_0/C^2 * (F^2 + 16 dV_norm^2) / (pi^2 P_in f_ib F^2)^2`.
pub fn predicted_error_variance(
    eom: &EomParams,
    detector: &DetectorConfig,
    f: NormalizedAmplitude,
    t_d: f64,
    delta_v_norm: f64,
) -> VariancePrediction {
    let f = f.get();
    let gain = PI * PI * eom.p_in * eom.f_ib * f * f;
    let sigma2 = 1.0 / t_d * detector.s_0 / (detector.c * detector.c)
        * (f * f + 16.0 * delta_v_norm * delta_v_norm)
        / (gain * gain);
    VariancePrediction::from_variance(sigma2)
}

/// Peak output power over one pilot period relative to the input, in dB.
///
/// The pilot sweeps the phase deviation from the null across
/// `[dV - V_d, dV + V_d]`; the exact output is largest where that interval
/// comes closest to an odd multiple of `V_pi` (a transmission maximum),
/// otherwise at the endpoint farthest from the null. Returns
/// `f64::NEG_INFINITY` when the peak output is exactly zero.
pub fn black_level(eom: &EomParams, delta_v: f64, v_d: f64) -> f64 {
    let v_d = v_d.abs();
    let (lo, hi) = (delta_v - v_d, delta_v + v_d);
    let deviation = if spans_transmission_peak(lo / eom.v_pi, hi / eom.v_pi) {
        eom.v_pi
    } else {
        // Within one basin the output grows with the distance from the null.
        nearest_basin_distance(lo, eom.v_pi).max(nearest_basin_distance(hi, eom.v_pi))
    };
    let peak = optical_output_power(eom, eom.v_min() - deviation);
    10.0 * (peak / eom.p_in).log10()
}

/// Black level by brute-force search over `samples` points of one pilot
/// period; a cross-check for [`black_level`].
pub fn black_level_grid(eom: &EomParams, delta_v: f64, v_d: f64, samples: usize) -> f64 {
    let v_hat = eom.v_min() - delta_v;
    let peak = (0..samples)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / samples as f64;
            optical_output_power(eom, v_hat - v_d * theta.sin())
        })
        .fold(0.0f64, f64::max);
    10.0 * (peak / eom.p_in).log10()
}

/// Whether `[lo, hi]` (in units of `V_pi`) contains an odd integer.
fn spans_transmission_peak(lo: f64, hi: f64) -> bool {
    let first_odd = 2.0 * ((lo - 1.0) / 2.0).ceil() + 1.0;
    first_odd <= hi
}

/// Distance of `x` from the nearest null, which sit at even multiples of `V_pi`.
fn nearest_basin_distance(x: f64, v_pi: f64) -> f64 {
    let period = 2.0 * v_pi;
    (x - period * (x / period).round()).abs()
}
