//! Run configuration: built-in defaults, overlaid by a flat `key=value`
//! config file, overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use eom_bias::{DetectorConfig, EomParams, NormalizedAmplitude, PilotConfig, Scenario};

use crate::error::CliError;

/// Default normalized-amplitude grid, 1-2-5 steps from 1e-4 to 5e-2.
pub const DEFAULT_F_GRID: &[f64] = &[1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2];
pub const DEFAULT_DV_GRID: &[f64] = &[0.0, 0.002];

#[derive(Debug, Parser)]
#[command(name = "eom-bias", version, about = "Pilot-tone EOM bias offset estimation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    Estimate,
    Predict,
    SweepAmplitude,
    BlackLevel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one noisy burst and print the offset estimate.
    Estimate(Flags),
    /// Print the closed-form standard deviation of the estimate.
    Predict(Flags),
    /// Monte Carlo error statistics over a grid of pilot amplitudes (CSV).
    SweepAmplitude(Flags),
    /// Relative black level over offset and amplitude grids (CSV).
    BlackLevel(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Estimate(f) => (CommandKind::Estimate, f),
            Command::Predict(f) => (CommandKind::Predict, f),
            Command::SweepAmplitude(f) => (CommandKind::SweepAmplitude, f),
            Command::BlackLevel(f) => (CommandKind::BlackLevel, f),
        }
    }
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Estimate => "estimate",
            CommandKind::Predict => "predict",
            CommandKind::SweepAmplitude => "sweep-amplitude",
            CommandKind::BlackLevel => "black-level",
        }
    }
}

#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Optical input power [W].
    #[arg(long)]
    pub pin: Option<f64>,
    /// Optical imbalance factor, 0 < fib <= 0.5.
    #[arg(long)]
    pub fib: Option<f64>,
    /// Half-wave voltage [V].
    #[arg(long)]
    pub vpi: Option<f64>,
    /// Zero-field phase-equivalent voltage [V].
    #[arg(long)]
    pub v0: Option<f64>,
    /// Opto-electric conversion factor [V/W].
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Square root of the noise PSD [V/sqrt(Hz)].
    #[arg(long = "s0-sqrt")]
    pub s0_sqrt: Option<f64>,
    /// Sampling frequency [Hz].
    #[arg(long)]
    pub fs: Option<f64>,
    /// Pilot frequency [Hz].
    #[arg(long)]
    pub fd: Option<f64>,
    /// Pilot periods per burst.
    #[arg(long)]
    pub periods: Option<u32>,
    /// Pilot initial phase [rad].
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Detector propagation delay [s]; must be a whole number of samples.
    #[arg(long)]
    pub delay: Option<f64>,
    /// Pilot amplitude [V].
    #[arg(long, conflicts_with = "f")]
    pub vd: Option<f64>,
    /// Pilot amplitude normalized to the half-wave voltage.
    #[arg(long = "F")]
    pub f: Option<f64>,
    /// True offset from the minimum, normalized to the half-wave voltage.
    #[arg(long = "dv-norm", allow_hyphen_values = true)]
    pub dv_norm: Option<f64>,
    /// Monte Carlo trials per sweep point.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated normalized amplitudes.
    #[arg(long = "f-grid")]
    pub f_grid: Option<String>,
    /// Comma-separated normalized offsets.
    #[arg(long = "dv-grid", allow_hyphen_values = true)]
    pub dv_grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// How the pilot amplitude was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Volts(f64),
    Normalized(f64),
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub p_in: f64,
    pub f_ib: f64,
    pub v_pi: f64,
    pub v_0: f64,
    pub c: f64,
    pub s0_sqrt: f64,
    pub f_s: f64,
    pub f_d: f64,
    pub n_periods: u32,
    pub phi_0: f64,
    pub delta_tau: f64,
    pub amplitude: Amplitude,
    pub dv_norm: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub f_grid: Vec<f64>,
    pub dv_grid: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Reference parameter set: 1 W laser, f_ib = 0.5, C = 0.1 V/W,
    /// 50 pV/sqrt(Hz) noise, 5 MHz sampling, 25 periods of a 0.5 MHz pilot.
    pub fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            p_in: 1.0,
            f_ib: 0.5,
            v_pi: 1.0,
            v_0: 0.0,
            c: 0.1,
            s0_sqrt: 50e-12,
            f_s: 5e6,
            f_d: 0.5e6,
            n_periods: 25,
            phi_0: 0.0,
            delta_tau: 0.0,
            amplitude: Amplitude::Normalized(1e-3),
            dv_norm: 0.002,
            n_trials: 2000,
            seed: 1,
            f_grid: DEFAULT_F_GRID.to_vec(),
            dv_grid: DEFAULT_DV_GRID.to_vec(),
            output_path: None,
            threads: None,
        }
    }

    pub fn eom(&self) -> Result<EomParams, CliError> {
        Ok(EomParams::new(self.p_in, self.v_pi, self.v_0, self.f_ib)?)
    }

    pub fn detector(&self) -> Result<DetectorConfig, CliError> {
        Ok(DetectorConfig::new(
            self.c,
            self.s0_sqrt * self.s0_sqrt,
            self.f_s,
            self.delta_tau,
        )?)
    }

    pub fn normalized_amplitude(&self) -> Result<NormalizedAmplitude, CliError> {
        let f = match self.amplitude {
            Amplitude::Volts(v) => v / self.v_pi,
            Amplitude::Normalized(f) => f,
        };
        Ok(NormalizedAmplitude::new(f)?)
    }

    pub fn pilot(&self) -> Result<PilotConfig, CliError> {
        let v_d = self.normalized_amplitude()?.get() * self.v_pi;
        Ok(PilotConfig::new(v_d, self.f_d, self.phi_0, self.n_periods)?)
    }

    /// Validated scenario; fails on any parameter or sampling error.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario::new(
            self.eom()?,
            self.pilot()?,
            self.detector()?,
            self.dv_norm,
            self.seed,
        )?)
    }

    /// Every setting that influences the output, as `key=value` pairs using
    /// the flag names. Floats use shortest round-trip formatting.
    pub fn provenance_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("command", self.command.name().to_string()),
            ("pin", fmt_f64(self.p_in)),
            ("fib", fmt_f64(self.f_ib)),
            ("vpi", fmt_f64(self.v_pi)),
            ("v0", fmt_f64(self.v_0)),
            ("C", fmt_f64(self.c)),
            ("s0-sqrt", fmt_f64(self.s0_sqrt)),
            ("fs", fmt_f64(self.f_s)),
            ("fd", fmt_f64(self.f_d)),
            ("periods", self.n_periods.to_string()),
            ("phi0", fmt_f64(self.phi_0)),
            ("delay", fmt_f64(self.delta_tau)),
        ];
        pairs.push(match self.amplitude {
            Amplitude::Volts(v) => ("vd", fmt_f64(v)),
            Amplitude::Normalized(f) => ("F", fmt_f64(f)),
        });
        pairs.extend([
            ("dv-norm", fmt_f64(self.dv_norm)),
            ("trials", self.n_trials.to_string()),
            ("seed", self.seed.to_string()),
            ("f-grid", fmt_grid(&self.f_grid)),
            ("dv-grid", fmt_grid(&self.dv_grid)),
        ]);
        pairs
    }

    /// The provenance pairs as a single space-separated line.
    pub fn provenance(&self) -> String {
        self.provenance_pairs()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn fmt_grid(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

/// Parses a flat `key=value` file: one pair per line, `#` starts a comment,
/// blank lines ignored. A provenance comment line is accepted as well: its
/// whitespace-separated pairs are read as if each were on its own line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let body = match line.strip_prefix('#') {
            // A comment that carries pairs is a provenance line.
            Some(rest) if rest.contains('=') => rest,
            Some(_) => continue,
            None => line,
        };
        for token in body.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| CliError::Config {
                line: idx + 1,
                message: format!("expected key=value, got `{token}`"),
            })?;
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config {
                    line: idx + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let grid = value
        .split(',')
        .map(|v| parse_value::<f64>(key, v.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err(CliError::Usage(format!("`{key}` must not be empty")));
    }
    Ok(grid)
}

fn apply_file(cfg: &mut RunConfig, map: &BTreeMap<String, String>) -> Result<(), CliError> {
    if map.contains_key("vd") && map.contains_key("F") {
        return Err(CliError::Usage("`vd` and `F` are mutually exclusive".into()));
    }
    for (key, value) in map {
        match key.as_str() {
            "command" => {
                if value != cfg.command.name() {
                    return Err(CliError::Usage(format!(
                        "config file is for `{value}`, not `{}`",
                        cfg.command.name()
                    )));
                }
            }
            "pin" => cfg.p_in = parse_value(key, value)?,
            "fib" => cfg.f_ib = parse_value(key, value)?,
            "vpi" => cfg.v_pi = parse_value(key, value)?,
            "v0" => cfg.v_0 = parse_value(key, value)?,
            "C" => cfg.c = parse_value(key, value)?,
            "s0-sqrt" => cfg.s0_sqrt = parse_value(key, value)?,
            "fs" => cfg.f_s = parse_value(key, value)?,
            "fd" => cfg.f_d = parse_value(key, value)?,
            "periods" => cfg.n_periods = parse_value(key, value)?,
            "phi0" => cfg.phi_0 = parse_value(key, value)?,
            "delay" => cfg.delta_tau = parse_value(key, value)?,
            "vd" => cfg.amplitude = Amplitude::Volts(parse_value(key, value)?),
            "F" => cfg.amplitude = Amplitude::Normalized(parse_value(key, value)?),
            "dv-norm" => cfg.dv_norm = parse_value(key, value)?,
            "trials" => cfg.n_trials = parse_value(key, value)?,
            "seed" => cfg.seed = parse_value(key, value)?,
            "f-grid" => cfg.f_grid = parse_grid(key, value)?,
            "dv-grid" => cfg.dv_grid = parse_grid(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, flags: &Flags) -> Result<(), CliError> {
    macro_rules! overlay {
        ($($field:ident => $target:ident),* $(,)?) => {
            $(if let Some(v) = flags.$field { cfg.$target = v; })*
        };
    }
    overlay!(
        pin => p_in, fib => f_ib, vpi => v_pi, v0 => v_0, c => c,
        s0_sqrt => s0_sqrt, fs => f_s, fd => f_d, periods => n_periods,
        phi0 => phi_0, delay => delta_tau, dv_norm => dv_norm,
        trials => n_trials, seed => seed,
    );
    match (flags.vd, flags.f) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("`--vd` and `--F` are mutually exclusive".into()))
        }
        (Some(v), None) => cfg.amplitude = Amplitude::Volts(v),
        (None, Some(f)) => cfg.amplitude = Amplitude::Normalized(f),
        (None, None) => {}
    }
    if let Some(grid) = &flags.f_grid {
        cfg.f_grid = parse_grid("f-grid", grid)?;
    }
    if let Some(grid) = &flags.dv_grid {
        cfg.dv_grid = parse_grid("dv-grid", grid)?;
    }
    cfg.output_path = flags.out.clone();
    cfg.threads = flags.threads;
    Ok(())
}

/// Resolves defaults, an optional config file's text, and flags, then
/// validates the resulting scenario so bad sampling is reported before any run.
pub fn resolve(
    command: CommandKind,
    flags: &Flags,
    config_text: Option<&str>,
) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(text) = config_text {
        apply_file(&mut cfg, &parse_config_text(text)?)?;
    }
    apply_flags(&mut cfg, flags)?;
    if cfg.n_trials < 2 && matches!(command, CommandKind::SweepAmplitude) {
        return Err(CliError::Usage("`trials` must be at least 2".into()));
    }
    if cfg.threads == Some(0) {
        return Err(CliError::Usage("`threads` must be at least 1".into()));
    }
    cfg.scenario()?;
    Ok(cfg)
}

/// Parses an argument vector (program name first) and reads `--config`.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let (kind, flags) = cli.command.split();
    let text = match &flags.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => None,
    };
    resolve(kind, &flags, text.as_deref())
}
