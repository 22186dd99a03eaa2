use std::fmt::Write as _;

use eom_bias::analysis::predicted_error_variance;
use eom_bias::detector::simulate_burst;
use eom_bias::estimator::{estimate_delta_v, is_large_offset};
use eom_bias::harness::{sweep_amplitude, sweep_black_level, trial_seed};

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;
use crate::output::{amplitude_table, black_level_table, emit_csv};

/// Executes a resolved run. Text reports are returned for the caller to
/// print; CSV tables are written by [`emit_csv`].
pub fn execute(cfg: &RunConfig) -> Result<Option<String>, CliError> {
    match cfg.command {
        CommandKind::Predict => predict(cfg).map(Some),
        CommandKind::Estimate => estimate(cfg).map(Some),
        CommandKind::SweepAmplitude => {
            let rows = with_threads(cfg, || {
                sweep_amplitude(&cfg.scenario()?, &cfg.f_grid, cfg.n_trials).map_err(CliError::from)
            })?;
            emit_csv(&amplitude_table(cfg.provenance(), &rows), cfg.output_path.as_deref())?;
            Ok(None)
        }
        CommandKind::BlackLevel => {
            let rows = sweep_black_level(&cfg.eom()?, &cfg.dv_grid, &cfg.f_grid)?;
            emit_csv(&black_level_table(cfg.provenance(), &rows), cfg.output_path.as_deref())?;
            Ok(None)
        }
    }
}

pub fn predict(cfg: &RunConfig) -> Result<String, CliError> {
    let sc = cfg.scenario()?;
    let p = predicted_error_variance(
        &sc.eom,
        &sc.detector,
        sc.normalized_amplitude(),
        sc.pilot.duration(),
        cfg.dv_norm,
    );
    let mut out = String::new();
    writeln!(out, "F={:e}", sc.normalized_amplitude().get()).unwrap();
    writeln!(out, "dv_norm={:e}", cfg.dv_norm).unwrap();
    writeln!(out, "T_d={:e}", sc.pilot.duration()).unwrap();
    writeln!(out, "sigma2={:.16e}", p.sigma2).unwrap();
    writeln!(out, "sigma={:.16e}", p.sigma).unwrap();
    Ok(out)
}

/// One noisy burst, drawn with the seed of Monte Carlo trial 0.
pub fn estimate(cfg: &RunConfig) -> Result<String, CliError> {
    let sc = cfg.scenario()?;
    let trace = simulate_burst(
        &sc.eom,
        &sc.pilot,
        &sc.detector,
        sc.v_hat_min(),
        trial_seed(sc.seed, 0),
    )?;
    let est = estimate_delta_v(&trace, sc.pilot.v_d, sc.pilot.f_d)?.with_v_pi(sc.eom.v_pi);
    let norm = est.delta_v_norm.unwrap_or(f64::NAN);
    let mut out = String::new();
    writeln!(out, "delta_v_norm_est={norm:.16e}").unwrap();
    writeln!(out, "delta_v_est={:.16e}", est.delta_v).unwrap();
    writeln!(out, "true_delta_v_norm={:e}", sc.true_delta_v_norm).unwrap();
    writeln!(out, "error={:.16e}", norm - sc.true_delta_v_norm).unwrap();
    writeln!(out, "predicted_std={:.16e}", sc.predicted_std()).unwrap();
    if is_large_offset(norm) {
        writeln!(out, "warning=large_offset").unwrap();
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    cfg: &RunConfig,
    job: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
        None => job(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_cfg: &RunConfig, job: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
    job()
}
