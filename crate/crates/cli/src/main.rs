//! `crlab <command> [--config FILE] [--lambda X] [--s-grid a,b,c] [--grid NxM]
//! [--out DIR] [--json] [--csv]`
//!
//! Exit status: 0 when every check passes, 2 when a check fails, 1 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use crlab::commands::{run, Command};
use crlab::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "crlab", version, about = "Numerical checks for CR structures on the 3-sphere")]
struct Args {
    /// verify-frame, verify-structure-eq, lift, flow, beltrami, variation,
    /// breaking-audit or search.
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stretch factor of the invariant family.
    #[arg(long)]
    lambda: Option<String>,
    /// Flow times for the fits, comma separated.
    #[arg(long = "s-grid", allow_hyphen_values = true)]
    s_grid: Option<String>,
    /// Sphere grid, `NxM`.
    #[arg(long)]
    grid: Option<String>,
    /// Output directory for the report and CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the console summary.
    #[arg(long)]
    json: bool,
    /// Also write CSV files.
    #[arg(long)]
    csv: bool,
}

fn configure(args: &Args) -> crlab::Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| crlab::Error::Configuration(format!("{}: {e}", path.display())))?;
            RunConfig::from_kv(&text)?
        }
        None => RunConfig::default(),
    };
    for (key, value) in [("lambda", &args.lambda), ("s_grid", &args.s_grid), ("sphere_grid", &args.grid)] {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    config.json |= args.json;
    config.csv |= args.csv;
    Ok(config)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure(&args).and_then(|config| {
        let output = run(args.command, &config)?;
        output.write(&config.out, config.csv)?;
        Ok((config, output))
    });
    match result {
        Ok((config, output)) => {
            if config.json {
                print!("{}", output.report.to_json());
            } else {
                print!("{}", output.report.console_summary());
            }
            if output.report.any_failed() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("crlab: {e}");
            ExitCode::from(1)
        }
    }
}
