use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hscar::config::ExperimentConfig;
use hscar::experiments::{run, Command};
use hscar::Error;

#[derive(Parser)]
#[command(name = "hscar", version, about = "Hilbert-space scar experiments on hard-core boson lattices")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output` key, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Overlap spectra, eigenstate entropies, towers and level statistics.
    Spectrum,
    /// Fidelity and entanglement dynamics.
    Dynamics,
    /// Logarithmic fidelity density against system size.
    Scaling,
    /// Hypercube-decay spectral functions.
    Hda,
    /// Hypercube and escape hopping-sum ratios.
    Ratio,
    /// Writes a random dimer cluster as a lattice file.
    ClusterGen,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Spectrum => Self::Spectrum,
            Cmd::Dynamics => Self::Dynamics,
            Cmd::Scaling => Self::Scaling,
            Cmd::Hda => Self::Hda,
            Cmd::Ratio => Self::Ratio,
            Cmd::ClusterGen => Self::ClusterGen,
        }
    }
}

fn main_inner(cli: Cli) -> Result<PathBuf, Error> {
    let path = cli.config.ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out = cli.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    run(cli.command.into(), &cfg, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
