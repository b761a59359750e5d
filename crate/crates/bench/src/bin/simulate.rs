//! `simulate --config <path> --out <csv> [--plot <path>] [--seed N]
//! [--detectors a,b,c] [--snr lo:hi:step]`
//!
//! Exit codes: 0 success, 1 configuration or argument error, 2 runtime error.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rkb_bench::{
    emit_plot_data, parse_config, parse_detectors, parse_snr_grid, run_scenario, write_csv, ConfigError,
    RunError,
};

#[derive(Parser, Debug)]
#[command(
    name = "simulate",
    about = "Monte-Carlo BER sweep over detectors and SNR points"
)]
struct Args {
    /// Scenario file (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Optional whitespace-separated plot data path
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Overrides `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `detectors`, comma separated
    #[arg(long)]
    detectors: Option<String>,
    /// Overrides `snr_db`, as lo:hi:step
    #[arg(long)]
    snr: Option<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn override_error(key: &str, message: String) -> Failure {
    Failure::Config(
        ConfigError::Validation {
            key: key.into(),
            message,
        }
        .to_string(),
    )
}

fn run(args: Args) -> Result<usize, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(list) = &args.detectors {
        cfg.detectors = parse_detectors(list).map_err(|m| override_error("detectors", m))?;
    }
    if let Some(grid) = &args.snr {
        cfg.snr_grid_db = parse_snr_grid(grid).map_err(|m| override_error("snr_db", m))?;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;

    let records = run_scenario(&cfg).map_err(|e| match e {
        RunError::Config(c) => Failure::Config(c.to_string()),
        other => Failure::Runtime(other.to_string()),
    })?;

    let io_err = |path: &PathBuf, e: std::io::Error| Failure::Runtime(format!("{}: {e}", path.display()));
    let file = File::create(&args.out).map_err(|e| io_err(&args.out, e))?;
    write_csv(&records, BufWriter::new(file)).map_err(|e| io_err(&args.out, e))?;
    if let Some(plot) = &args.plot {
        let file = File::create(plot).map_err(|e| io_err(plot, e))?;
        emit_plot_data(&records, BufWriter::new(file)).map_err(|e| io_err(plot, e))?;
    }
    Ok(records.len())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok(n) => {
            eprintln!("wrote {n} records");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            ExitCode::from(2)
        }
    }
}
