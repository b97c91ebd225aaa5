use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{NoiseConfig, NoiseMode};
use crate::photonics::ParamVector;
use crate::schwinger::{exact_order_parameter, extreme_levels};
use crate::seeding::{derive_seed, stream_rng};
use crate::spsa::{run_vqe, TrialResult, VqeProblem};

use super::config::ExperimentConfig;
use super::output::{header_with_thetas, CsvTable};

/// δ below which a run counts as properly converged.
pub const PROPER_DELTA: f64 = 0.1;

/// Stream of a trial seed reserved for drawing its starting point.
const START_STREAM: u64 = u64::MAX;

const TAG_MASS: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_CONVERGE: u64 = 3;
const TAG_STATS: u64 = 4;

/// Uniform start in the period hypercube `[0, π)⁶`.
pub fn random_start(trial_seed: u64) -> ParamVector {
    let mut rng = stream_rng(trial_seed, START_STREAM);
    ParamVector(std::array::from_fn(|_| rng.random_range(0.0..PI)))
}

/// Maps every angle into `[0, π)`, the period of the ansatz.
pub fn wrap_to_period(theta: &ParamVector) -> ParamVector {
    theta.wrapped()
}

/// Median of a non-empty slice; NaN for an empty one.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn trial(cfg: &ExperimentConfig, m: f64, noise: NoiseConfig, seed: u64) -> Result<TrialResult> {
    let problem = VqeProblem::new(m, cfg.shots, noise)?.with_drift(cfg.drift_step)?;
    run_vqe(
        &problem,
        random_start(seed),
        cfg.iterations,
        &cfg.spsa,
        seed,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassRecord {
    pub m: f64,
    pub trial: u64,
    pub seed: u64,
    pub energy: f64,
    pub energy_exact: f64,
    pub order_param: f64,
    pub order_param_exact: f64,
    pub delta: f64,
}

/// `trials` VQE runs at every mass of the grid, alongside the exact curves.
pub fn mass_sweep(cfg: &ExperimentConfig) -> Result<Vec<MassRecord>> {
    cfg.validate()?;
    let noise = cfg.noise_config()?;
    let jobs: Vec<(usize, f64, u64)> = cfg
        .masses()
        .into_iter()
        .enumerate()
        .flat_map(|(i, m)| (0..cfg.trials).map(move |t| (i, m, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, m, t)| {
            let seed = derive_seed(cfg.seed, &[TAG_MASS, i as u64, t]);
            let r = trial(cfg, m, noise.clone(), seed)?;
            Ok(MassRecord {
                m,
                trial: t,
                seed,
                energy: r.energy,
                energy_exact: extreme_levels(m).0,
                order_param: r.order_parameter,
                order_param_exact: exact_order_parameter(m)?,
                delta: r.delta,
            })
        })
        .collect()
}

pub fn write_mass_sweep(dir: &Path, records: &[MassRecord]) -> Result<PathBuf> {
    let mut t = CsvTable::new(&[
        "m",
        "trial",
        "seed",
        "energy",
        "energy_exact",
        "order_param",
        "order_param_exact",
        "delta",
    ]);
    for r in records {
        t.push(vec![
            r.m.into(),
            r.trial.into(),
            r.seed.into(),
            r.energy.into(),
            r.energy_exact.into(),
            r.order_param.into(),
            r.order_param_exact.into(),
            r.delta.into(),
        ]);
    }
    let path = dir.join("mass_sweep.csv");
    t.write(&path)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseRecord {
    pub m: f64,
    pub epsilon: f64,
    pub mode: NoiseMode,
    pub trial: u64,
    pub energy: f64,
    pub order_param: f64,
}

/// Converged energy and ⟨O⟩ over the full mass × ε grid.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<NoiseRecord>> {
    cfg.validate()?;
    if cfg.noise == NoiseMode::None {
        return Err(Error::Config(
            "noise sweep needs noise mode qubit1 or both".into(),
        ));
    }
    let mut jobs = Vec::new();
    for (i, m) in cfg.masses().into_iter().enumerate() {
        for (j, eps) in cfg.epsilons().into_iter().enumerate() {
            for t in 0..cfg.trials {
                jobs.push((i, m, j, eps, t));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(i, m, j, eps, t)| {
            let seed = derive_seed(cfg.seed, &[TAG_NOISE, i as u64, j as u64, t]);
            let r = trial(cfg, m, NoiseConfig::new(cfg.noise, eps)?, seed)?;
            Ok(NoiseRecord {
                m,
                epsilon: eps,
                mode: cfg.noise,
                trial: t,
                energy: r.energy,
                order_param: r.order_parameter,
            })
        })
        .collect()
}

pub fn write_noise_sweep(dir: &Path, records: &[NoiseRecord]) -> Result<PathBuf> {
    let mut t = CsvTable::new(&["m", "epsilon", "mode", "trial", "energy", "order_param"]);
    for r in records {
        t.push(vec![
            r.m.into(),
            r.epsilon.into(),
            r.mode.to_string().as_str().into(),
            r.trial.into(),
            r.energy.into(),
            r.order_param.into(),
        ]);
    }
    let path = dir.join("noise_sweep.csv");
    t.write(&path)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub mass: f64,
    pub trials: Vec<TrialResult>,
    /// Per-iteration median of the trace energies across trials.
    pub median: Vec<f64>,
}

/// Full traces of `trials` runs at a single mass.
pub fn convergence_run(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let m = cfg.mass();
    let noise = cfg.noise_config()?;
    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            trial(
                cfg,
                m,
                noise.clone(),
                derive_seed(cfg.seed, &[TAG_CONVERGE, t]),
            )
        })
        .collect::<Result<_>>()?;
    let median = (0..cfg.iterations as usize)
        .map(|k| median(&trials.iter().map(|r| r.trace[k].energy).collect::<Vec<_>>()))
        .collect();
    Ok(ConvergenceResult {
        mass: m,
        trials,
        median,
    })
}

pub fn write_convergence(dir: &Path, result: &ConvergenceResult) -> Result<Vec<PathBuf>> {
    let mut t = CsvTable::new(&header_with_thetas(&["trial", "iteration", "energy"], &[]));
    for (i, r) in result.trials.iter().enumerate() {
        for log in &r.trace {
            let mut row = vec![(i as u64).into(), log.k.into(), log.energy.into()];
            row.extend(log.theta.iter().map(|&v| v.into()));
            t.push(row);
        }
    }
    let traces = dir.join("convergence.csv");
    t.write(&traces)?;

    let mut t = CsvTable::new(&["iteration", "median_energy"]);
    for (k, e) in result.median.iter().enumerate() {
        t.push(vec![(k as u64 + 1).into(), (*e).into()]);
    }
    let med = dir.join("convergence_median.csv");
    t.write(&med)?;
    Ok(vec![traces, med])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Uniform bins over the observed range; the last bin is closed on the right.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<Bin>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter(
                "histogram needs at least one bin".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("histogram input"));
        }
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if values.is_empty() {
            (lo, hi) = (0.0, 1.0);
        } else if lo == hi {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        let width = (hi - lo) / bins as f64;
        let mut out: Vec<Bin> = (0..bins)
            .map(|i| Bin {
                lo: lo + i as f64 * width,
                hi: if i + 1 == bins {
                    hi
                } else {
                    lo + (i + 1) as f64 * width
                },
                count: 0,
            })
            .collect();
        for &v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            out[i].count += 1;
        }
        Ok(Self { bins: out })
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut t = CsvTable::new(&["bin_lo", "bin_hi", "count"]);
        for b in &self.bins {
            t.push(vec![b.lo.into(), b.hi.into(), b.count.into()]);
        }
        t.write(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRecord {
    pub run_id: u64,
    /// Final angles wrapped into `[0, π)`.
    pub theta: ParamVector,
    pub energy: f64,
    pub order_param: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsResult {
    pub mass: f64,
    pub records: Vec<StatsRecord>,
    pub energy_hist: Histogram,
    pub order_hist: Histogram,
    /// Fraction of runs with δ below [`PROPER_DELTA`].
    pub proper_fraction: f64,
}

/// `runs` VQE runs from uniform starts at a single mass.
pub fn initial_point_stats(cfg: &ExperimentConfig) -> Result<StatsResult> {
    cfg.validate()?;
    let m = cfg.mass();
    let noise = cfg.noise_config()?;
    let records: Vec<StatsRecord> = (0..cfg.runs)
        .into_par_iter()
        .map(|id| {
            let r = trial(
                cfg,
                m,
                noise.clone(),
                derive_seed(cfg.seed, &[TAG_STATS, id]),
            )?;
            Ok(StatsRecord {
                run_id: id,
                theta: wrap_to_period(&r.theta),
                energy: r.energy,
                order_param: r.order_parameter,
                delta: r.delta,
            })
        })
        .collect::<Result<_>>()?;
    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let orders: Vec<f64> = records.iter().map(|r| r.order_param).collect();
    let proper = records.iter().filter(|r| r.delta < PROPER_DELTA).count();
    Ok(StatsResult {
        mass: m,
        energy_hist: Histogram::new(&energies, cfg.bins)?,
        order_hist: Histogram::new(&orders, cfg.bins)?,
        proper_fraction: proper as f64 / records.len() as f64,
        records,
    })
}

pub fn write_stats(dir: &Path, stats: &StatsResult) -> Result<Vec<PathBuf>> {
    let mut t = CsvTable::new(&header_with_thetas(
        &["run_id"],
        &["energy", "order_param", "delta"],
    ));
    for r in &stats.records {
        let mut row = vec![r.run_id.into()];
        row.extend(r.theta.iter().map(|&v| v.into()));
        row.extend([r.energy.into(), r.order_param.into(), r.delta.into()]);
        t.push(row);
    }
    let raw = dir.join("stats_raw.csv");
    t.write(&raw)?;
    let he = dir.join("stats_hist_energy.csv");
    stats.energy_hist.write(&he)?;
    let ho = dir.join("stats_hist_order.csv");
    stats.order_hist.write(&ho)?;
    Ok(vec![raw, he, ho])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Shots;

    fn small(m: f64) -> ExperimentConfig {
        ExperimentConfig {
            m: Some(m),
            trials: 2,
            iterations: 5,
            runs: 6,
            shots: Shots::Count(200),
            ..Default::default()
        }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_to_period(&ParamVector::zeros()), ParamVector::zeros());
        let w = wrap_to_period(&ParamVector([PI + 0.1, -0.2, 0.0, 0.0, 0.0, 0.0]));
        assert!((w[0] - 0.1).abs() < 1e-12);
        assert!((w[1] - (PI - 0.2)).abs() < 1e-12);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn histogram_counts_and_edges() {
        let h = Histogram::new(&[0.0, 0.5, 1.0, 1.0], 4).unwrap();
        assert_eq!(
            h.bins.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![1, 0, 1, 2]
        );
        assert_eq!(h.bins[0].lo, 0.0);
        assert_eq!(h.bins[3].hi, 1.0);
        let flat = Histogram::new(&[2.0; 5], 60).unwrap();
        assert_eq!(flat.total(), 5);
        assert_eq!(flat.bins.len(), 60);
        assert!(Histogram::new(&[1.0], 0).is_err());
    }

    #[test]
    fn starts_lie_in_period_cube() {
        for s in 0..50 {
            assert!(random_start(s).iter().all(|v| (0.0..PI).contains(v)));
        }
    }

    #[test]
    fn convergence_trace_of_one_iteration() {
        let cfg = ExperimentConfig {
            trials: 1,
            iterations: 1,
            ..small(-8.0)
        };
        let r = convergence_run(&cfg).unwrap();
        assert_eq!(r.trials.len(), 1);
        assert_eq!(r.trials[0].trace.len(), 1);
        assert_eq!(r.median.len(), 1);
    }

    #[test]
    fn stats_counts_match_runs() {
        let s = initial_point_stats(&small(0.0)).unwrap();
        assert_eq!(s.records.len(), 6);
        assert_eq!(s.energy_hist.total(), 6);
        assert_eq!(s.order_hist.total(), 6);
        assert!(s
            .records
            .iter()
            .all(|r| r.theta.iter().all(|v| (0.0..PI).contains(v))));
    }

    #[test]
    fn noise_sweep_requires_noise() {
        assert!(noise_sweep(&small(0.0)).is_err());
        let cfg = ExperimentConfig {
            noise: NoiseMode::Both,
            epsilon_grid: vec![0.5, 1.0],
            ..small(0.0)
        };
        let r = noise_sweep(&cfg).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r[2].epsilon, 1.0);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let cfg = ExperimentConfig {
            m: None,
            m_min: -1.0,
            m_max: 1.0,
            ..small(0.0)
        };
        let a = mass_sweep(&cfg).unwrap();
        assert_eq!(a, mass_sweep(&cfg).unwrap());
        assert_eq!(a.len(), 6);
        assert_eq!(a[2].m, 0.0);
    }
}
