//! Batch experiments over many VQE trials and their file outputs.

mod config;
mod output;
mod pca;
mod runners;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{ExperimentConfig, DEFAULT_BINS, DEFAULT_RUNS};
pub use output::{format_float, write_manifest, Cell, CsvTable, SIG_DIGITS};
pub use pca::{pca_project, PcaResult, COMPONENTS};
pub use runners::{
    convergence_run, initial_point_stats, mass_sweep, median, noise_sweep, random_start,
    wrap_to_period, write_convergence, write_mass_sweep, write_noise_sweep, write_stats, Bin,
    ConvergenceResult, Histogram, MassRecord, NoiseRecord, StatsRecord, StatsResult, PROPER_DELTA,
};

use crate::error::Result;

/// The file-producing experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    MassSweep,
    NoiseSweep,
    Convergence,
    Stats,
    Pca,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MassSweep => "sweep-mass",
            Self::NoiseSweep => "sweep-noise",
            Self::Convergence => "converge",
            Self::Stats => "stats",
            Self::Pca => "pca",
        }
    }
}

pub fn write_pca(dir: &std::path::Path, result: &PcaResult) -> Result<PathBuf> {
    let mut t = CsvTable::new(&["run_id", "pc1", "pc2", "pc3", "energy"]);
    for (i, (p, e)) in result.projections.iter().zip(&result.energies).enumerate() {
        t.push(vec![
            (i as u64).into(),
            p[0].into(),
            p[1].into(),
            p[2].into(),
            (*e).into(),
        ]);
    }
    let path = dir.join("pca.csv");
    t.write(&path)?;
    Ok(path)
}

/// Runs `kind` with `cfg`, writes its CSVs and `manifest.json` into `cfg.out`,
/// and returns the written paths.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = cfg.out.as_path();
    let files = match kind {
        ExperimentKind::MassSweep => vec![write_mass_sweep(dir, &mass_sweep(cfg)?)?],
        ExperimentKind::NoiseSweep => vec![write_noise_sweep(dir, &noise_sweep(cfg)?)?],
        ExperimentKind::Convergence => write_convergence(dir, &convergence_run(cfg)?)?,
        ExperimentKind::Stats => write_stats(dir, &initial_point_stats(cfg)?)?,
        ExperimentKind::Pca => {
            let stats = initial_point_stats(cfg)?;
            let points: Vec<_> = stats.records.iter().map(|r| r.theta).collect();
            let energies: Vec<_> = stats.records.iter().map(|r| r.energy).collect();
            vec![write_pca(dir, &pca_project(&points, &energies)?)?]
        }
    };
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = write_manifest(dir, kind.name(), cfg, &names, start.elapsed())?;
    log::info!("{} finished in {:.1?}", kind.name(), start.elapsed());
    Ok(files.into_iter().chain([manifest]).collect())
}
