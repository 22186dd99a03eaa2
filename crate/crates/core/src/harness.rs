//! Monte Carlo validation of the estimator against the closed-form variance.
//!
//! Every trial simulates one noisy burst through the exact transfer function
//! and estimates the normalized offset. Trial `i` draws its noise from
//! [`trial_seed`]`(scenario.seed, i)`, so trials are independent of
//! execution order; per-trial estimates are collected in index order and
//! reduced sequentially, which makes the statistics bit-identical for any
//! number of worker threads.

use crate::analysis::{black_level, predicted_error_variance};
use crate::detector::{simulate_burst, DetectorConfig};
use crate::eom::EomParams;
use crate::error::{invalid, Error, Result};
use crate::estimator::estimate_delta_v_norm;
use crate::pilot::{validate_sampling, NormalizedAmplitude, PilotConfig};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A complete experiment: modulator, pilot burst, detector, true offset and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub eom: EomParams,
    pub pilot: PilotConfig,
    pub detector: DetectorConfig,
    pub true_delta_v_norm: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(
        eom: EomParams,
        pilot: PilotConfig,
        detector: DetectorConfig,
        true_delta_v_norm: f64,
        seed: u64,
    ) -> Result<Self> {
        if !true_delta_v_norm.is_finite() {
            return Err(invalid("delta_v_norm", "must be finite"));
        }
        validate_sampling(&pilot, detector.f_s)?;
        detector.delay_samples()?;
        Ok(Self {
            eom,
            pilot,
            detector,
            true_delta_v_norm,
            seed,
        })
    }

    /// Bias voltage actually applied: the minimum shifted by the true offset.
    pub fn v_hat_min(&self) -> f64 {
        self.eom.v_min() - self.true_delta_v_norm * self.eom.v_pi
    }

    pub fn normalized_amplitude(&self) -> NormalizedAmplitude {
        self.pilot.normalized_amplitude(self.eom.v_pi)
    }

    /// Same scenario with the pilot amplitude set to `f * V_pi`.
    pub fn with_amplitude(self, f: NormalizedAmplitude) -> Self {
        Self {
            pilot: self.pilot.with_normalized_amplitude(f, self.eom.v_pi),
            ..self
        }
    }

    /// Closed-form standard deviation of the normalized estimate.
    pub fn predicted_std(&self) -> f64 {
        predicted_error_variance(
            &self.eom,
            &self.detector,
            self.normalized_amplitude(),
            self.pilot.duration(),
            self.true_delta_v_norm,
        )
        .sigma
    }

    /// Simulates and estimates trial `index`.
    pub fn trial(&self, index: u64) -> Result<f64> {
        let trace = simulate_burst(
            &self.eom,
            &self.pilot,
            &self.detector,
            self.v_hat_min(),
            trial_seed(self.seed, index),
        )?;
        estimate_delta_v_norm(&trace, self.normalized_amplitude(), self.pilot.f_d)
    }
}

/// Aggregate estimation error over a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    /// Trials that produced an estimate.
    pub n_trials: usize,
    /// Trials dropped for a degenerate second-harmonic bin.
    pub exclusions: usize,
    pub true_delta_v_norm: f64,
    pub mean_estimate: f64,
    /// Root-mean-square of `estimate - truth`.
    pub std_error: f64,
    /// Sample standard deviation of the estimates about their own mean.
    pub std_dev: f64,
    /// `mean_estimate - truth`.
    pub bias: f64,
    pub predicted_std: f64,
}

/// Seed of trial `index`: the `index + 1`-th output of a SplitMix64 stream
/// started at `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials < 2 {
        return Err(invalid("n_trials", format!("must be at least 2, got {n_trials}")));
    }
    Ok(())
}

/// Runs `n_trials` bursts, in parallel when the `parallel` feature is on.
pub fn run_monte_carlo(sc: &Scenario, n_trials: usize) -> Result<ErrorStats> {
    check_trials(n_trials)?;
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<f64>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| sc.trial(i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<f64>> = (0..n_trials as u64).map(|i| sc.trial(i)).collect();
    aggregate(sc, outcomes)
}

/// Single-threaded reference path; produces the same bits as [`run_monte_carlo`].
pub fn run_monte_carlo_sequential(sc: &Scenario, n_trials: usize) -> Result<ErrorStats> {
    check_trials(n_trials)?;
    let outcomes = (0..n_trials as u64).map(|i| sc.trial(i)).collect();
    aggregate(sc, outcomes)
}

fn aggregate(sc: &Scenario, outcomes: Vec<Result<f64>>) -> Result<ErrorStats> {
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut exclusions = 0;
    for outcome in outcomes {
        match outcome {
            Ok(est) => estimates.push(est),
            Err(Error::DegenerateDenominator { .. }) => exclusions += 1,
            Err(e) => return Err(e),
        }
    }
    let n = estimates.len();
    if n < 2 {
        return Err(Error::TooFewTrials {
            required: 2,
            valid: n,
            excluded: exclusions,
        });
    }
    let truth = sc.true_delta_v_norm;
    let nf = n as f64;
    // Welford in index order: deterministic, and exactly zero spread for
    // identical estimates.
    let (mean, m2) = estimates
        .iter()
        .enumerate()
        .fold((0.0f64, 0.0f64), |(mean, m2), (k, &e)| {
            let delta = e - mean;
            let mean = mean + delta / (k + 1) as f64;
            (mean, m2 + delta * (e - mean))
        });
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / nf;
    let var = m2 / (nf - 1.0);
    Ok(ErrorStats {
        n_trials: n,
        exclusions,
        true_delta_v_norm: truth,
        mean_estimate: mean,
        std_error: mse.sqrt(),
        std_dev: var.sqrt(),
        bias: mean - truth,
        predicted_std: sc.predicted_std(),
    })
}

/// One row of an amplitude sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeRow {
    pub f: f64,
    pub predicted_std: f64,
    pub stats: Result<ErrorStats>,
}

impl AmplitudeRow {
    /// Excluded trials, including those of a failed row.
    pub fn exclusions(&self) -> usize {
        match &self.stats {
            Ok(s) => s.exclusions,
            Err(Error::TooFewTrials { excluded, .. }) => *excluded,
            Err(_) => 0,
        }
    }
}

/// Monte Carlo run per normalized amplitude, in the order given.
pub fn sweep_amplitude(
    base: &Scenario,
    f_values: &[f64],
    n_trials: usize,
) -> Result<Vec<AmplitudeRow>> {
    sweep_amplitude_with(base, f_values, n_trials, run_monte_carlo)
}

pub fn sweep_amplitude_sequential(
    base: &Scenario,
    f_values: &[f64],
    n_trials: usize,
) -> Result<Vec<AmplitudeRow>> {
    sweep_amplitude_with(base, f_values, n_trials, run_monte_carlo_sequential)
}

fn sweep_amplitude_with(
    base: &Scenario,
    f_values: &[f64],
    n_trials: usize,
    run: fn(&Scenario, usize) -> Result<ErrorStats>,
) -> Result<Vec<AmplitudeRow>> {
    if f_values.is_empty() {
        return Err(invalid("f_values", "must not be empty"));
    }
    check_trials(n_trials)?;
    let amplitudes = f_values
        .iter()
        .map(|&f| match NormalizedAmplitude::new(f) {
            Ok(a) if f > 0.0 => Ok(a),
            _ => Err(invalid("f_values", format!("all amplitudes must be positive, got {f}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(amplitudes
        .into_iter()
        .map(|f| {
            let sc = base.with_amplitude(f);
            AmplitudeRow {
                f: f.get(),
                predicted_std: sc.predicted_std(),
                stats: run(&sc, n_trials),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackLevelRow {
    pub delta_v_norm: f64,
    pub f: f64,
    /// Relative black level in dB; `-inf` for a perfectly dark output.
    pub p_bl_rel_db: f64,
}

/// Black level over the grid `delta_v_norm_values x f_values`, offsets outermost.
pub fn sweep_black_level(
    eom: &EomParams,
    delta_v_norm_values: &[f64],
    f_values: &[f64],
) -> Result<Vec<BlackLevelRow>> {
    if delta_v_norm_values.is_empty() || f_values.is_empty() {
        return Err(invalid("grid", "offset and amplitude grids must not be empty"));
    }
    Ok(delta_v_norm_values
        .iter()
        .flat_map(|&dv| {
            f_values.iter().map(move |&f| BlackLevelRow {
                delta_v_norm: dv,
                f,
                p_bl_rel_db: black_level(eom, dv * eom.v_pi, f * eom.v_pi),
            })
        })
        .collect())
}
