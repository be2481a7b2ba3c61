//! Command-line harness. Log level comes from `FIMSENSE_LOG` (default `warn`).
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
//! 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fimsense::config::ExperimentConfig;
use fimsense::experiment::{run_beampattern, run_compare_schemes, run_optimize, run_sweep_power, run_sweep_range};
use fimsense::{Error, Result};

#[derive(Parser)]
#[command(name = "fimsense", version, about = "Flexible-metasurface MIMO sensing experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured scheme and save the solution.
    Optimize,
    /// Evaluate the angular power map of a saved solution.
    Beampattern {
        /// Directory holding covariance.csv and shape.csv (default: the output directory).
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Cumulated power of all four schemes versus transmit power.
    SweepPower {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.0, 10.0, 15.0, 20.0])]
        p_t_dbm: Vec<f64>,
    },
    /// Cumulated power versus maximum morphing range.
    SweepRange {
        /// Morphing ranges in wavelengths, nondecreasing.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
        d_max: Vec<f64>,
        /// Array sizes as NXxNZ, e.g. 6x6,8x8 (default: the configured array).
        #[arg(long, value_delimiter = ',', value_parser = parse_array)]
        arrays: Vec<(usize, usize)>,
    },
    /// Run all four schemes with beampatterns and a summary table.
    CompareSchemes,
}

fn parse_array(s: &str) -> std::result::Result<(usize, usize), String> {
    let (x, z) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NXxNZ, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((dim(x)?, dim(z)?))
}

fn run(cli: Cli) -> Result<()> {
    let path = cli.common.config.ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.common.out {
        cfg.output.dir = out;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::Optimize => {
            let record = run_optimize(&cfg, &out)?;
            println!("{}", record.to_json_pretty());
        }
        Command::Beampattern { results } => {
            let grid = run_beampattern(&cfg, results.as_ref().unwrap_or(&out), &out)?;
            println!("peak {:.3} dBm", grid.max_dbm());
        }
        Command::SweepPower { p_t_dbm } => {
            for row in run_sweep_power(&cfg, &p_t_dbm, &out)? {
                println!("{:>7.2} dBm  {:<8}  {:.6} mW", row.p_t_dbm, row.scheme, row.cumulated_mw);
            }
        }
        Command::SweepRange { d_max, arrays } => {
            for row in run_sweep_range(&cfg, &d_max, &arrays, &out)? {
                println!("{}x{}  d_max {:.3}  {:.6} mW", row.n_x, row.n_z, row.d_max_wavelengths, row.cumulated_mw);
            }
        }
        Command::CompareSchemes => {
            for record in run_compare_schemes(&cfg, &out)? {
                println!(
                    "{:<8}  {:.6} mW  min target {:.3} dBm",
                    record.scheme, record.objective_mw, record.min_target_dbm
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIMSENSE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
