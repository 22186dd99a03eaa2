use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_eom-bias");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn predict_uses_reference_defaults() {
    let out = run(&["predict", "--F", "1e-3", "--dv-norm", "0.002"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "T_d"), 50e-6);
    // 1/T_d * S_0/C^2 * (F^2 + 16 dv^2) / (pi^2 P_in f_ib F^2)^2 with the
    // reference constants written out independently.
    let (t_d, s_0, c, p_in, f_ib, f, dv) = (50e-6, 2.5e-21, 0.1, 1.0, 0.5, 1e-3, 0.002);
    let g: f64 = std::f64::consts::PI.powi(2) * p_in * f_ib * f * f;
    let expected = (s_0 / (t_d * c * c) * (f * f + 16.0 * dv * dv) / (g * g)).sqrt();
    assert!((field(&text, "sigma") / expected - 1.0).abs() < 1e-12);

    let bare = stdout(&run(&["predict"]));
    assert_eq!(bare, text);
}

#[test]
fn amplitude_flags_conflict() {
    let out = run(&["predict", "--vd", "1e-3", "--F", "1e-3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot be used with"));
}

#[test]
fn sampling_failure_reported() {
    let out = run(&["sweep-amplitude", "--fs", "1.9e6", "--fd", "0.5e6"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("must exceed 4 x pilot frequency"));
}

#[test]
fn estimate_prints_offset() {
    let out = run(&["estimate", "--dv-norm", "-0.002", "--F", "5e-3", "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let est = field(&text, "delta_v_norm_est");
    assert!((est + 0.002).abs() < 5.0 * field(&text, "predicted_std"));
}

#[test]
fn black_level_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bl.csv");
    let out = run(&["black-level", "--f-grid", "0,1e-3", "--dv-grid", "0,0.002", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# command=black-level "));
    assert_eq!(lines[1], "dv_norm,F,p_bl_rel_db");
    assert_eq!(lines[2], "0.0000000000000000e0,0.0000000000000000e0,-inf");
    assert_eq!(lines.len(), 6);
}

#[test]
fn sweep_csv_schema() {
    let out = run(&["sweep-amplitude", "--trials", "50", "--f-grid", "1e-3,5e-3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "F,std_error,predicted_std,bias,exclusions,n_trials");
    assert_eq!(lines.len(), 4);
    for line in &lines[2..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[5], "50");
        // 17 significant digits.
        assert_eq!(cells[1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
}

fn sweep_to(path: &Path, extra: &[&str]) -> String {
    let mut args = vec!["sweep-amplitude", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    fs::read_to_string(path).unwrap()
}

#[test]
fn provenance_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = sweep_to(
        &dir.path().join("a.csv"),
        &["--trials", "200", "--seed", "17", "--f-grid", "2e-4,1e-3,0.02", "--fib", "0.45", "--dv-norm", "0.001"],
    );
    let provenance = first.lines().next().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, provenance.trim_start_matches("# ").replace(' ', "\n")).unwrap();
    let second = sweep_to(&dir.path().join("b.csv"), &["--config", config.to_str().unwrap()]);
    assert_eq!(first, second);

    // The raw comment line is also accepted as a config file.
    fs::write(&config, provenance).unwrap();
    let third = sweep_to(&dir.path().join("c.csv"), &["--config", config.to_str().unwrap()]);
    assert_eq!(first, third);
}

#[test]
fn config_file_for_another_command_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "command=black-level\n").unwrap();
    let out = run(&["predict", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn missing_config_file_reported() {
    let out = run(&["predict", "--config", "/no/such/file.cfg"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.cfg"));
}
