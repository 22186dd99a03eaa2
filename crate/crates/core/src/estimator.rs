//! Bias-offset estimation from the ratio of the pilot's first and second
//! harmonic DFT bins.
//!
//! With the pilot phase compensated to zero, the first harmonic of the
//! detector signal is a pure sine (imaginary DFT bin) whose amplitude is odd
//! in the offset, and the second harmonic a pure negative cosine (real DFT
//! bin) independent of it. Their ratio is `4 * dV / V_d`, free of the input
//! power, imbalance factor, detector gain and half-wave voltage.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::detector::SampledTrace;
use crate::error::{invalid, Error, Result};
use crate::pilot::NormalizedAmplitude;

/// The denominator must exceed this many machine epsilons of the largest
/// sample magnitude.
pub const DEGENERACY_FACTOR: f64 = 1e3;

/// Normalized offsets beyond this lie outside the basin of the targeted
/// minimum and cannot be trusted.
pub const LARGE_OFFSET_NORM: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    /// Estimated offset in volts.
    pub delta_v: f64,
    /// Offset relative to the half-wave voltage, once `V_pi` is supplied.
    pub delta_v_norm: Option<f64>,
    pub bin_1f: Complex64,
    pub bin_2f: Complex64,
}

impl EstimateResult {
    pub fn with_v_pi(mut self, v_pi: f64) -> Self {
        self.delta_v_norm = Some(self.delta_v / v_pi);
        self
    }

    /// `Some(true)` when the offset exceeds half a half-wave voltage.
    pub fn large_offset(&self) -> Option<bool> {
        self.delta_v_norm.map(is_large_offset)
    }
}

pub fn is_large_offset(delta_v_norm: f64) -> bool {
    delta_v_norm.abs() > LARGE_OFFSET_NORM
}

/// Single DFT bin with `1/N` normalization.
pub fn dft_bin(samples: &[f64], k: usize) -> Result<Complex64> {
    let n = samples.len();
    if k >= n {
        return Err(Error::BinOutOfRange { bin: k, len: n });
    }
    let step = 2.0 * PI / n as f64;
    let sum = samples
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, &x)| {
            // Reduce k*i modulo N on the integers to keep the angle small.
            let angle = -step * ((k * i) % n) as f64;
            acc + Complex64::from_polar(x, angle)
        });
    Ok(sum / n as f64)
}

/// Locates the fundamental and second-harmonic bins of a coherently sampled
/// pilot in a trace of `n` samples.
pub fn harmonic_bins(n: usize, f_s: f64, f_d: f64) -> Result<(usize, usize)> {
    if !(f_d > 0.0 && f_d.is_finite()) {
        return Err(invalid("f_d", format!("must be positive, got {f_d}")));
    }
    if f_s <= 4.0 * f_d {
        return Err(Error::NyquistViolation { f_s, f_d });
    }
    let exact = n as f64 * f_d / f_s;
    let bin = exact.round();
    if bin < 1.0 || (exact - bin).abs() > 1e-9 * exact.max(1.0) {
        return Err(Error::NonIntegerPeriods {
            n_periods: exact.floor() as u32,
            ratio: f_s / f_d,
        });
    }
    let bin = bin as usize;
    Ok((bin, 2 * bin))
}

/// `imag(X[z_1]) / real(X[z_2])` together with both bins.
fn harmonic_ratio(trace: &SampledTrace, f_d: f64) -> Result<(f64, Complex64, Complex64)> {
    let (z1, z2) = harmonic_bins(trace.len(), trace.f_s, f_d)?;
    let bin_1f = dft_bin(&trace.samples, z1)?;
    let bin_2f = dft_bin(&trace.samples, z2)?;
    let peak = trace.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let threshold = DEGENERACY_FACTOR * f64::EPSILON * peak;
    if bin_2f.re.is_nan() || bin_2f.re.abs() <= threshold {
        return Err(Error::DegenerateDenominator {
            value: bin_2f.re,
            threshold,
        });
    }
    Ok((bin_1f.im / bin_2f.re, bin_1f, bin_2f))
}

/// Offset in volts from a delay-compensated trace and the pilot amplitude.
pub fn estimate_delta_v(trace: &SampledTrace, v_d: f64, f_d: f64) -> Result<EstimateResult> {
    if !(v_d > 0.0 && v_d.is_finite()) {
        return Err(invalid("v_d", format!("must be positive, got {v_d}")));
    }
    let (ratio, bin_1f, bin_2f) = harmonic_ratio(trace, f_d)?;
    Ok(EstimateResult {
        delta_v: ratio * v_d / 4.0,
        delta_v_norm: None,
        bin_1f,
        bin_2f,
    })
}

/// Offset relative to the half-wave voltage from the normalized amplitude.
pub fn estimate_delta_v_norm(
    trace: &SampledTrace,
    f: NormalizedAmplitude,
    f_d: f64,
) -> Result<f64> {
    if f.get() <= 0.0 {
        return Err(invalid("F", "must be positive"));
    }
    let (ratio, _, _) = harmonic_ratio(trace, f_d)?;
    Ok(ratio * f.get() / 4.0)
}
