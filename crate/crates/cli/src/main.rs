//! `fedran`: train and compare link-adaptation policies on the simulated
//! factory network.
//!
//! Verbosity is controlled through `RUST_LOG` (e.g. `RUST_LOG=info`).

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use fedran_core::federate::RunMode;
use fedran_core::{compare, load_summary, parse_config, run_experiment, Federation, RunConfig};

#[derive(Parser)]
#[command(name = "fedran", version, about = "Federated link-adaptation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment grid and write CSV curves plus a
    /// summary.
    Run {
        /// TOML configuration file; omitted means built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict the run to one mode: feddrl, idrl, or ra.
        #[arg(long)]
        mode: Option<String>,
        /// Override the configured seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Export the control-plane signaling trace next to the curves.
        #[arg(long)]
        trace: bool,
    },
    /// Print federated-versus-baseline percentage deltas for a finished run.
    Compare {
        /// Directory holding summary.toml from a previous run.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Capture the control-plane message trace of a short random-policy run.
    Trace {
        /// TOML configuration file; omitted means built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of simulation steps to record.
        #[arg(long)]
        steps: u32,
        /// Output NDJSON file; omitted prints to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            Ok(parse_config(&text).with_context(|| format!("config {}", p.display()))?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Run { config, mode, seeds, out, trace } => {
            let mut cfg = load_config(&config)?;
            if let Some(mode) = mode {
                cfg.modes = vec![mode.parse::<RunMode>()?];
            }
            if let Some(seeds) = seeds {
                anyhow::ensure!(!seeds.is_empty(), "--seeds needs at least one value");
                cfg.seeds = seeds;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if trace {
                cfg.export_trace = true;
            }
            let summary = run_experiment(&cfg)?;
            println!(
                "wrote {} curve file(s) and summary.toml to {}",
                summary.modes.len() * summary.seeds.len(),
                cfg.out_dir.display()
            );
            for m in &summary.modes {
                println!(
                    "{:<7} throughput {:>12.1} bps  reward {:>9.3}  energy {:>10.6} mJ  efficiency {:>12.1} bits/mJ",
                    m.mode.to_string(),
                    m.throughput_bps_mean,
                    m.cum_reward_mean,
                    m.energy_mj_mean,
                    m.efficiency_mean
                );
            }
            Ok(())
        }
        Command::Compare { input } => {
            let summary = load_summary(&input)?;
            let table = compare(std::slice::from_ref(&summary))?;
            print!("{table}");
            Ok(())
        }
        Command::Trace { config, steps, out } => {
            anyhow::ensure!(steps > 0, "--steps must be at least 1");
            let cfg = load_config(&config)?;
            let seed = cfg.seeds.first().copied().unwrap_or(1);
            let mut fed = Federation::new(&cfg, RunMode::Ra, seed, true)?;
            fed.run_steps(steps)?;
            let trace = fed.env().trace();
            match out {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    trace.write_ndjson(std::io::BufWriter::new(file))?;
                    println!("wrote {} trace record(s) to {}", trace.len(), path.display());
                }
                None => trace.write_ndjson(std::io::stdout().lock())?,
            }
            Ok(())
        }
    }
}
