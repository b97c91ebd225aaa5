use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photovqe::experiments::{format_float, run_experiment, ExperimentConfig, ExperimentKind};
use photovqe::schwinger::extreme_levels;
use photovqe::{NoiseMode, Shots};

/// Simulated photonic VQE for the two-site lattice Schwinger model.
#[derive(Parser, Debug)]
#[command(name = "photovqe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the four exact levels of H₂(m).
    Spectrum(Overrides),
    /// VQE trials over a mass grid (mass_sweep.csv).
    SweepMass(Overrides),
    /// VQE trials over a mass × noise-strength grid (noise_sweep.csv).
    SweepNoise(Overrides),
    /// Full optimizer traces at one mass (convergence.csv).
    Converge(Overrides),
    /// Uniform-start statistics at one mass (stats_*.csv).
    Stats(Overrides),
    /// PCA of the final angles from a stats run (pca.csv).
    Pca(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON config file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m_max: Option<f64>,
    #[arg(long)]
    m_step: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    iterations: Option<u64>,
    /// Shots per setting, or `exact`.
    #[arg(long)]
    shots: Option<Shots>,
    /// none, qubit1 or both.
    #[arg(long)]
    noise: Option<NoiseMode>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                ExperimentConfig::from_json(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        // Any grid flag without --m switches back to the grid.
        if self.m.is_some() || self.m_min.is_some() || self.m_max.is_some() || self.m_step.is_some()
        {
            cfg.m = self.m;
        }
        cfg.m_min = self.m_min.unwrap_or(cfg.m_min);
        cfg.m_max = self.m_max.unwrap_or(cfg.m_max);
        cfg.m_step = self.m_step.unwrap_or(cfg.m_step);
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.iterations = self.iterations.unwrap_or(cfg.iterations);
        cfg.shots = self.shots.unwrap_or(cfg.shots);
        cfg.noise = self.noise.unwrap_or(cfg.noise);
        if self.epsilon.is_some() {
            cfg.epsilon = self.epsilon;
        }
        cfg.runs = self.runs.unwrap_or(cfg.runs);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if let Some(out) = self.out {
            cfg.out = out;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn spectrum(cfg: &ExperimentConfig) {
    let m = cfg.mass();
    let (e4, e1) = extreme_levels(m);
    println!("m={}", format_float(m));
    for (name, e) in [("E4", e4), ("E3", 1.0), ("E2", 2.0), ("E1", e1)] {
        println!("{name}={}", format_float(e));
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let (kind, overrides) = match cli.command {
        Command::Spectrum(o) => {
            spectrum(&o.resolve()?);
            return Ok(());
        }
        Command::SweepMass(o) => (ExperimentKind::MassSweep, o),
        Command::SweepNoise(o) => (ExperimentKind::NoiseSweep, o),
        Command::Converge(o) => (ExperimentKind::Convergence, o),
        Command::Stats(o) => (ExperimentKind::Stats, o),
        Command::Pca(o) => (ExperimentKind::Pca, o),
    };
    let cfg = overrides.resolve()?;
    let files = run_experiment(kind, &cfg).map_err(|e| e.to_string())?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
