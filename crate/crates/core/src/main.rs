use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nv_seesaw::dynamics::EvolutionMode;
use nv_seesaw::harness::{
    self, build_figures, load_config, run_contour, run_deflection, run_timeseries, run_verify, to_json, write_figures,
    write_file, HarnessError, HarnessResult, ScenarioConfig, VerifyOptions,
};

/// Entanglement of two NV spins coupled through a magnetically deflected
/// nanocantilever.
#[derive(Debug, Parser)]
#[command(name = "nv-seesaw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file (CSV for evolve/sweep, JSON for deflect/verify). Default: stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Evolution route for sweeps and figure contours.
    #[arg(long, global = true)]
    mode: Option<EvolutionMode>,

    /// Override the integration step, in μs.
    #[arg(long = "dt-us", global = true)]
    dt_us: Option<f64>,

    /// Seed for the randomized checks in `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mechanical report: mass, resonances, deflections, field bound.
    Deflect { config: PathBuf },
    /// Concurrence time series for one (α, Δh).
    Evolve { config: PathBuf },
    /// Concurrence at t* over the (α, Δh) grid.
    Sweep { config: PathBuf },
    /// Run the invariant suite and list known model discrepancies.
    Verify,
    /// Write fig3..fig6 CSVs and provenance for the reference preset.
    Figures {
        outdir: PathBuf,
        /// Scenario to use instead of the reference preset.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: &Path, cli: &Cli) -> HarnessResult<ScenarioConfig> {
    let mut cfg = load_config(path)?;
    if let Some(dt) = cli.dt_us {
        cfg.dynamics.dt_us = dt;
    }
    if let Some(mode) = cli.mode {
        cfg.dynamics.mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, body: &str) -> HarnessResult<()> {
    match out {
        Some(path) => write_file(path, body),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|source| HarnessError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

/// `foo.csv` → `foo.json`, next to the CSV.
fn provenance_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn run(cli: &Cli) -> HarnessResult<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Deflect { config } => {
            let cfg = load(config, cli)?;
            emit(out, &to_json(&run_deflection(&cfg)?))?;
        }
        Command::Evolve { config } => {
            let cfg = load(config, cli)?;
            let ts = run_timeseries(&cfg)?;
            emit(out, &ts.to_csv())?;
            if let Some(path) = out {
                write_file(&provenance_path(path), &to_json(&ts.provenance))?;
            }
        }
        Command::Sweep { config } => {
            let cfg = load(config, cli)?;
            let sweep = run_contour(&cfg, cfg.dynamics.mode, None)?;
            emit(out, &sweep.to_csv())?;
            if let Some(path) = out {
                write_file(&provenance_path(path), &to_json(&sweep))?;
            }
        }
        Command::Verify => {
            let report = run_verify(&VerifyOptions { seed: cli.seed, ..VerifyOptions::default() });
            print!("{}", report.to_text());
            if let Some(path) = out {
                write_file(path, &to_json(&report))?;
            }
            return Ok(report.exit_code());
        }
        Command::Figures { outdir, config } => {
            let mut cfg = match config {
                Some(path) => load(path, cli)?,
                None => ScenarioConfig::default(),
            };
            if let Some(dt) = cli.dt_us {
                cfg.dynamics.dt_us = dt;
            }
            if let Some(mode) = cli.mode {
                cfg.dynamics.mode = mode;
            }
            cfg.validate()?;
            let set = build_figures(&cfg, harness::thread_count(None))?;
            write_figures(&set, outdir)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
