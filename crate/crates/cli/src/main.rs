use std::fs;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use eom_bias_cli::{config, run, Cli};

fn run_cli() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (kind, flags) = cli.command.split();
    let text = flags
        .config
        .as_ref()
        .map(|path| fs::read_to_string(path).with_context(|| format!("reading {}", path.display())))
        .transpose()?;
    let cfg = config::resolve(kind, &flags, text.as_deref())?;
    if let Some(report) = run::execute(&cfg)? {
        print!("{report}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run_cli() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
