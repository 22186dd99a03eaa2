use std::f64::consts::PI;

use eom_bias::harness::{run_monte_carlo, run_monte_carlo_sequential, sweep_amplitude};
use eom_bias::{DetectorConfig, EomParams, NormalizedAmplitude, PilotConfig, Scenario};

const TRIALS: usize = 2000;
const S0: f64 = 2.5e-21;

fn reference_eom() -> EomParams {
    EomParams::new(1.0, 1.0, 0.0, 0.5).unwrap()
}

fn scenario(dv_norm: f64, f: f64, f_d: f64, n_periods: u32, s_0: f64, seed: u64) -> Scenario {
    let eom = reference_eom();
    Scenario::new(
        eom,
        PilotConfig::new(f * eom.v_pi, f_d, 0.0, n_periods).unwrap(),
        DetectorConfig::new(0.1, s_0, 5e6, 0.0).unwrap(),
        dv_norm,
        seed,
    )
    .unwrap()
}

/// Bessel function of the first kind by its power series; fine for small x.
fn bessel_j(n: i32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..40 {
        term *= -half * half / (f64::from(m) * f64::from(m + n));
        sum += term;
    }
    sum
}

/// Noise-free estimate on the exact transfer function: expanding
/// `cos(pi (d + F sin t))` in Bessel harmonics gives
/// `tan(pi d) J1(pi F) / J2(pi F) * F / 4`.
fn bessel_oracle(dv_norm: f64, f: f64) -> f64 {
    (PI * dv_norm).tan() * bessel_j(1, PI * f) / bessel_j(2, PI * f) * f / 4.0
}

#[test]
fn noise_free_estimate_matches_bessel_oracle() {
    for dv in [-0.004, -0.002, 0.0005, 0.002, 0.005] {
        for f in [1e-3, 5e-3, 2e-2, 5e-2] {
            let est = scenario(dv, f, 0.5e6, 25, 0.0, 0).trial(0).unwrap();
            let oracle = bessel_oracle(dv, f);
            assert!((est - oracle).abs() < 1e-12, "dv={dv} F={f}: {est} vs {oracle}");
        }
    }
}

#[test]
fn pinned_noise_free_residual() {
    let residual = scenario(0.002, 1e-3, 0.5e6, 25, 0.0, 0).trial(0).unwrap() - 0.002;
    assert!((residual - 2.549_687_134_340_006_3e-8).abs() < 1e-12);
    assert!(residual.abs() < 1e-6);
}

#[test]
fn noise_free_run_reports_only_the_residual() {
    let stats = run_monte_carlo(&scenario(0.002, 1e-3, 0.5e6, 25, 0.0, 9), 50).unwrap();
    assert_eq!(stats.std_dev, 0.0);
    assert!((stats.bias - 2.549_687_134_340_006_3e-8).abs() < 1e-12);
}

#[test]
fn mid_range_matches_prediction() {
    let stats = run_monte_carlo(&scenario(0.002, 1e-3, 0.5e6, 25, S0, 1), TRIALS).unwrap();
    assert!((stats.predicted_std - 1.155_239_236_309_502_9e-4).abs() < 1e-15);
    let ratio = stats.std_error / stats.predicted_std;
    assert!((ratio - 1.0).abs() <= 0.10, "ratio {ratio}");
}

#[test]
fn small_amplitude_breaks_the_normal_approximation() {
    let stats = run_monte_carlo(&scenario(0.002, 2e-4, 0.5e6, 25, S0, 1), TRIALS).unwrap();
    assert!(stats.std_error > 1.5 * stats.predicted_std);
}

#[test]
fn doubling_burst_length_shrinks_error() {
    for f in [1e-3, 5e-3] {
        let short = run_monte_carlo(&scenario(0.0, f, 0.5e6, 25, S0, 3), TRIALS).unwrap();
        let long = run_monte_carlo(&scenario(0.0, f, 0.5e6, 50, S0, 4), TRIALS).unwrap();
        let ratio = long.std_error / short.std_error;
        let ideal = 1.0 / 2f64.sqrt();
        assert!(ratio >= 0.9 * ideal && ratio <= 1.1 * ideal, "F={f}: {ratio}");
        assert!((long.predicted_std / short.predicted_std - ideal).abs() < 1e-12);
    }
}

#[test]
fn pilot_frequency_is_irrelevant() {
    // Both bursts last 50 us.
    let a = run_monte_carlo(&scenario(0.002, 2e-3, 0.5e6, 25, S0, 5), TRIALS).unwrap();
    let b = run_monte_carlo(&scenario(0.002, 2e-3, 0.2e6, 10, S0, 6), TRIALS).unwrap();
    assert_eq!(a.predicted_std, b.predicted_std);
    let n = TRIALS as f64;
    let se = (a.std_error.powi(2) / (2.0 * n) + b.std_error.powi(2) / (2.0 * n)).sqrt();
    assert!((a.std_error - b.std_error).abs() <= 3.0 * se);
}

#[test]
fn bias_in_noise_is_residual_only() {
    let residual = scenario(0.002, 2e-3, 0.5e6, 25, 0.0, 0).trial(0).unwrap() - 0.002;
    let stats = run_monte_carlo(&scenario(0.002, 2e-3, 0.5e6, 25, S0, 8), TRIALS).unwrap();
    let se = stats.std_dev / (stats.n_trials as f64).sqrt();
    assert!((stats.bias - residual).abs() <= 3.0 * se);
}

#[test]
fn identical_across_thread_counts() {
    let sc = scenario(0.002, 1e-3, 0.5e6, 25, S0, 77);
    let reference = run_monte_carlo_sequential(&sc, 500).unwrap();
    for threads in [1, 2, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let stats = pool.install(|| run_monte_carlo(&sc, 500)).unwrap();
        assert_eq!(stats, reference, "{threads} threads");
    }
    assert_eq!(run_monte_carlo(&sc, 500).unwrap(), reference);
}

#[test]
fn sweep_orders_rows_and_tracks_theory() {
    let fs = [1e-3, 2e-3, 5e-3];
    let zero = sweep_amplitude(&scenario(0.0, 1e-3, 0.5e6, 25, S0, 10), &fs, 200).unwrap();
    let offset = sweep_amplitude(&scenario(0.002, 1e-3, 0.5e6, 25, S0, 10), &fs, 200).unwrap();
    for (z, o) in zero.iter().zip(&offset) {
        assert_eq!(z.f, o.f);
        assert!(z.predicted_std < o.predicted_std);
    }
    assert!((zero[0].predicted_std / zero[1].predicted_std - 2.0).abs() < 1e-12);
    assert_eq!(zero.iter().map(|r| r.f).collect::<Vec<_>>(), fs);
}

#[test]
fn u_shaped_deviation_across_amplitudes() {
    let grid = [1e-4, 2e-4, 1e-3, 2e-3, 5e-3, 1e-2, 5e-2];
    let rows = sweep_amplitude(&scenario(0.002, 1e-3, 0.5e6, 25, S0, 11), &grid, TRIALS).unwrap();
    let ratio = |f: f64| {
        let row = rows.iter().find(|r| r.f == f).unwrap();
        row.stats.as_ref().unwrap().std_error / row.predicted_std
    };
    for f in [1e-3, 2e-3, 5e-3, 1e-2] {
        assert!((ratio(f) - 1.0).abs() <= 0.15, "F={f}: {}", ratio(f));
    }
    assert!(ratio(2e-4) > 1.5);
    assert!(ratio(5e-2) > 1.5);
}

#[test]
fn normalized_amplitude_substitution() {
    let sc = scenario(0.0, 1e-3, 0.5e6, 25, S0, 0);
    let swapped = sc.with_amplitude(NormalizedAmplitude::new(4e-3).unwrap());
    assert_eq!(swapped.pilot.v_d, 4e-3 * sc.eom.v_pi);
    assert_eq!(swapped.normalized_amplitude().get(), 4e-3);
}
