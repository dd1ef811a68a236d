//! Command-line front end: runs experiments from a config file, with the
//! subcommand selecting the experiment family.

use clap::{Parser, Subcommand};
use kinlab::lab::{self, build_config, parse_config_text, ExperimentKind};
use kinlab::{KinError, Result};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "kinlab",
    version,
    about = "Mean-field kinetic Langevin simulator and diagnostics"
)]
struct Cli {
    /// Config file, flat key = value lines or a JSON object.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled trajectory diagnostics (raw time series).
    Simulate,
    /// Convergence-rate certificate: exact rate, explicit bound, spectrum.
    Rates,
    /// Self-consistent stationary position density.
    Equilibrium,
    /// Propagation-of-chaos scaling in N.
    Chaos,
    /// Relative-entropy decay along the Gaussian moment flow.
    Entropy,
    /// Exceedance frequencies of the empirical measure around equilibrium.
    Confidence,
    /// Growth of the parallel-coupling distance.
    Coupling,
}

fn execute(cli: &Cli) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(KinError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| KinError::Config(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.map_or(false, |t| t > 1) {
        return Err(KinError::Config(
            "built without the parallel feature; only --threads 1 is available".into(),
        ));
    }

    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_config_text(&text)?
        }
        None => Default::default(),
    };
    if let Some(seed) = cli.seed {
        map.insert("seed".to_string(), seed.to_string());
    }
    if let Some(out) = &cli.out {
        map.insert("out".to_string(), out.display().to_string());
    }

    let default_kind = match cli.command {
        Command::Simulate => None,
        Command::Rates => Some(ExperimentKind::RateCertificate),
        Command::Equilibrium => Some(ExperimentKind::EquilibriumMarginal),
        Command::Chaos => Some(ExperimentKind::ChaosScaling),
        Command::Entropy => Some(ExperimentKind::EntropyDecay),
        Command::Confidence => Some(ExperimentKind::ConfidenceCurve),
        Command::Coupling => Some(ExperimentKind::CouplingGrowth),
    };

    let record = match cli.command {
        Command::Simulate => {
            // kind is irrelevant for raw trajectories; any placeholder works
            map.entry("kind".to_string())
                .or_insert_with(|| "coupling".to_string());
            let cfg = build_config(&map, None)?;
            lab::run_trajectory(&cfg)?
        }
        Command::Equilibrium => {
            let mut cfg = build_config(&map, default_kind)?;
            cfg.kind = ExperimentKind::EquilibriumMarginal;
            lab::run_equilibrium_density(&cfg)?
        }
        _ => {
            let mut cfg = build_config(&map, default_kind)?;
            cfg.kind = default_kind.unwrap();
            lab::run(&cfg)?
        }
    };

    let summary = serde_json::to_string_pretty(&record)
        .map_err(|e| KinError::Numerical(format!("summary serialization: {e}")))?;
    // ignore EPIPE so `kinlab ... | head` exits quietly
    let _ = writeln!(std::io::stdout(), "{summary}");
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
