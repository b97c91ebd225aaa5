use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{NoiseConfig, NoiseMode, Shots};
use crate::spsa::SpsaMeta;

/// Histogram bin count used when none is configured.
pub const DEFAULT_BINS: usize = 60;

/// Run count for initial-point statistics when none is configured.
pub const DEFAULT_RUNS: u64 = 10_000;

/// Settings shared by every experiment. Unset fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Single mass; overrides the grid when set.
    pub m: Option<f64>,
    pub m_min: f64,
    pub m_max: f64,
    pub m_step: f64,
    pub trials: u64,
    pub iterations: u64,
    pub shots: Shots,
    pub noise: NoiseMode,
    /// Single noise strength; overrides `epsilon_grid` when set.
    pub epsilon: Option<f64>,
    pub epsilon_grid: Vec<f64>,
    pub runs: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub spsa: SpsaMeta,
    pub drift_step: f64,
    pub bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: None,
            m_min: -8.0,
            m_max: 8.0,
            m_step: 1.0,
            trials: 30,
            iterations: 500,
            shots: Shots::default(),
            noise: NoiseMode::None,
            epsilon: None,
            epsilon_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            runs: DEFAULT_RUNS,
            seed: 0,
            out: PathBuf::from("out"),
            spsa: SpsaMeta::default(),
            drift_step: 0.0,
            bins: DEFAULT_BINS,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if let Some(m) = self.m {
            if !m.is_finite() {
                return bad("m must be finite");
            }
        } else {
            if ![self.m_min, self.m_max, self.m_step]
                .iter()
                .all(|v| v.is_finite())
            {
                return bad("mass grid must be finite");
            }
            if self.m_step <= 0.0 || self.m_max < self.m_min {
                return bad("mass grid is empty");
            }
        }
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1");
        }
        if self.runs == 0 {
            return bad("runs must be >= 1");
        }
        if self.bins == 0 {
            return bad("bins must be >= 1");
        }
        if self.epsilon_grid.is_empty() && self.epsilon.is_none() {
            return bad("epsilon grid is empty");
        }
        let in_range = |e: f64| (0.0..=1.0).contains(&e);
        if !self.epsilon.is_none_or(in_range) || !self.epsilon_grid.iter().all(|&e| in_range(e)) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.drift_step.is_finite() && self.drift_step >= 0.0) {
            return bad("drift_step must be >= 0");
        }
        self.spsa.validate()
    }

    /// Masses visited by a sweep, in ascending order.
    pub fn masses(&self) -> Vec<f64> {
        if let Some(m) = self.m {
            return vec![m];
        }
        let n = ((self.m_max - self.m_min) / self.m_step + 1e-9).floor() as u64;
        (0..=n)
            .map(|i| self.m_min + i as f64 * self.m_step)
            .collect()
    }

    /// Mass for single-point experiments.
    pub fn mass(&self) -> f64 {
        self.m.unwrap_or(0.0)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        match self.epsilon {
            Some(e) => vec![e],
            None => self.epsilon_grid.clone(),
        }
    }

    /// Noise for single-point experiments; ε defaults to 0.
    pub fn noise_config(&self) -> Result<NoiseConfig> {
        match self.noise {
            NoiseMode::None => Ok(NoiseConfig::none()),
            mode => NoiseConfig::new(mode, self.epsilon.unwrap_or(0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.masses().len(), 17);
        assert_eq!(cfg.epsilons().len(), 10);
        assert_eq!(cfg.bins, 60);
    }

    #[test]
    fn parses_partial_json() {
        let cfg = ExperimentConfig::from_json(
            r#"{"m": -0.5, "shots": "exact", "noise": "both", "spsa": {"a0": 0.1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.masses(), vec![-0.5]);
        assert_eq!(cfg.shots, Shots::Exact);
        assert_eq!(cfg.noise, NoiseMode::Both);
        assert_eq!(cfg.spsa.a0, 0.1);
        assert_eq!(cfg.spsa.b0, SpsaMeta::default().b0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"mass": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"spsa": {"gain": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"trials": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"epsilon": 1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"m_min": 1, "m_max": 0}"#).is_err());
    }

    #[test]
    fn grid_includes_endpoint() {
        let cfg = ExperimentConfig {
            m_min: -1.0,
            m_max: 1.0,
            m_step: 0.1,
            ..Default::default()
        };
        let g = cfg.masses();
        assert_eq!(g.len(), 21);
        assert!((g[20] - 1.0).abs() < 1e-12);
    }
}
