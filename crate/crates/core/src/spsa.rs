//! Simultaneous-perturbation stochastic approximation.
//!
//! Each iteration draws a ±1 direction Δ, evaluates the objective at
//! `θ ± b·Δ`, forms `g = (E₊ − E₋)/(2b)·Δ` and steps `θ ← θ − a·g`. The gains
//! decay as `a(k) = (a₀ − a_f)/k^0.602 + a_f` and
//! `b(k) = (b₀ − b_f)/k^0.101 + b_f`; nonzero floors let the optimizer keep
//! tracking a slowly moving optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    order_parameter_estimate, DriftInjector, EnergyEstimator, NoiseConfig, Shots,
};
use crate::photonics::ParamVector;
use crate::schwinger::{accuracy_delta, build_schwinger, SchwingerConfig};
use crate::seeding::{stream_rng, SimRng};

/// Base meta-parameters before mass scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaMeta {
    pub a0: f64,
    pub af: f64,
    pub b0: f64,
    pub bf: f64,
    pub step_exponent: f64,
    pub perturbation_exponent: f64,
}

impl Default for SpsaMeta {
    fn default() -> Self {
        Self {
            a0: 0.05,
            af: 0.005,
            b0: 0.1,
            bf: 0.002,
            step_exponent: 0.602,
            perturbation_exponent: 0.101,
        }
    }
}

impl SpsaMeta {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a0 >= self.af
            && self.af >= 0.0
            && self.b0 >= self.bf
            && self.bf >= 0.0
            && self.step_exponent > 0.0
            && self.perturbation_exponent > 0.0
            && [self.a0, self.af, self.b0, self.bf]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "SPSA meta-parameters need a0 >= af >= 0 and b0 >= bf >= 0, got {self:?}"
            )))
        }
    }
}

/// Gains actually used by a run (after mass scaling).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub a0: f64,
    pub af: f64,
    pub b0: f64,
    pub bf: f64,
    pub step_exponent: f64,
    pub perturbation_exponent: f64,
}

impl From<SpsaMeta> for Gains {
    fn from(m: SpsaMeta) -> Self {
        Self {
            a0: m.a0,
            af: m.af,
            b0: m.b0,
            bf: m.bf,
            step_exponent: m.step_exponent,
            perturbation_exponent: m.perturbation_exponent,
        }
    }
}

/// `(a(k), b(k))` for a 1-based iteration index.
pub fn schedule(k: u64, g: &Gains) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "SPSA iterations are 1-based".into(),
        ));
    }
    let k = k as f64;
    let a = (g.a0 - g.af) / k.powf(g.step_exponent) + g.af;
    let b = (g.b0 - g.bf) / k.powf(g.perturbation_exponent) + g.bf;
    Ok((a, b))
}

/// Divides all four base gains by `1 + 0.2|m|`.
///
/// Agrees with `0.2m + 1` for m ≥ 0 and keeps shrinking the gains as the
/// energy scale grows on the negative side.
pub fn mass_adjust(m: f64, meta: &SpsaMeta) -> Result<Gains> {
    if !m.is_finite() {
        return Err(Error::NonFinite("mass"));
    }
    let s = 1.0 + 0.2 * m.abs();
    Ok(Gains {
        a0: meta.a0 / s,
        af: meta.af / s,
        b0: meta.b0 / s,
        bf: meta.bf / s,
        step_exponent: meta.step_exponent,
        perturbation_exponent: meta.perturbation_exponent,
    })
}

/// Random direction with ±1 entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerturbationVector([i8; 6]);

impl PerturbationVector {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(std::array::from_fn(|_| {
            if rng.random::<bool>() {
                1
            } else {
                -1
            }
        }))
    }

    /// Bit i of `bits` set ⇒ entry i is −1. Covers all 64 directions for `bits < 64`.
    pub fn from_bits(bits: u8) -> Self {
        Self(std::array::from_fn(
            |i| if bits >> i & 1 == 1 { -1 } else { 1 },
        ))
    }

    pub fn entries(&self) -> [i8; 6] {
        self.0
    }

    fn as_f64(&self) -> [f64; 6] {
        self.0.map(f64::from)
    }
}

/// Black-box objective minimized by SPSA.
pub trait Objective {
    fn evaluate(&mut self, theta: &ParamVector) -> Result<f64>;
}

impl<F> Objective for F
where
    F: FnMut(&ParamVector) -> Result<f64>,
{
    fn evaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        self(theta)
    }
}

/// Counts evaluations of the wrapped objective.
pub struct Counted<O> {
    inner: O,
    count: u64,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn evaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        self.count += 1;
        self.inner.evaluate(theta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub k: u64,
    /// Parameters after this iteration's update.
    pub theta: ParamVector,
    /// Mean of the two perturbed evaluations.
    pub energy: f64,
    pub a: f64,
    pub b: f64,
}

/// Simultaneous-perturbation gradient estimate along `delta` with half-width `b`.
///
/// Returns the estimate and the two evaluations `(E(θ+bΔ), E(θ−bΔ))`.
pub fn gradient_estimate<O: Objective + ?Sized>(
    theta: &ParamVector,
    delta: &PerturbationVector,
    b: f64,
    objective: &mut O,
) -> Result<(ParamVector, f64, f64)> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "perturbation size must be positive, got {b}"
        )));
    }
    let d = delta.as_f64();
    let plus = theta.zip_with(&ParamVector(d), |t, di| t + b * di);
    let minus = theta.zip_with(&ParamVector(d), |t, di| t - b * di);
    let e_plus = objective.evaluate(&plus)?;
    let e_minus = objective.evaluate(&minus)?;
    let scale = (e_plus - e_minus) / (2.0 * b);
    Ok((ParamVector(d.map(|di| scale * di)), e_plus, e_minus))
}

/// One SPSA iteration at 1-based index `k`.
pub fn spsa_step<O: Objective + ?Sized, R: Rng + ?Sized>(
    theta: &ParamVector,
    k: u64,
    objective: &mut O,
    gains: &Gains,
    rng: &mut R,
) -> Result<(ParamVector, IterationLog)> {
    let (a, b) = schedule(k, gains)?;
    let delta = PerturbationVector::random(rng);
    let (g, e_plus, e_minus) = gradient_estimate(theta, &delta, b, objective)?;
    let next = theta.zip_with(&g, |t, gi| t - a * gi);
    Ok((
        next,
        IterationLog {
            k,
            theta: next,
            energy: 0.5 * (e_plus + e_minus),
            a,
            b,
        },
    ))
}

/// Plain SPSA loop over an arbitrary objective.
pub fn minimize<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &mut O,
    theta0: ParamVector,
    iterations: u64,
    gains: &Gains,
    rng: &mut R,
) -> Result<(ParamVector, Vec<IterationLog>)> {
    let mut theta = theta0;
    let mut trace = Vec::with_capacity(iterations as usize);
    for k in 1..=iterations {
        let (next, log) = spsa_step(&theta, k, objective, gains, rng)?;
        theta = next;
        trace.push(log);
    }
    Ok((theta, trace))
}

/// A two-qubit Schwinger VQE problem: what to minimize and how it is measured.
#[derive(Clone, Debug)]
pub struct VqeProblem {
    mass: f64,
    estimator: EnergyEstimator,
    drift_step: f64,
}

impl VqeProblem {
    pub fn new(mass: f64, shots: Shots, noise: NoiseConfig) -> Result<Self> {
        let h = build_schwinger(&SchwingerConfig::two_qubit(mass))?;
        Ok(Self {
            mass,
            estimator: EnergyEstimator::new(&h, shots, noise)?,
            drift_step: 0.0,
        })
    }

    /// Enables the synthetic preparation drift with the given per-iteration step.
    pub fn with_drift(mut self, step: f64) -> Result<Self> {
        DriftInjector::new(step)?;
        self.drift_step = step;
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn estimator(&self) -> &EnergyEstimator {
        &self.estimator
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Final parameters as returned by the optimizer (not wrapped).
    pub theta: ParamVector,
    /// Infinite-shot energy at the final point.
    pub energy: f64,
    /// Infinite-shot ⟨O⟩ at the final point.
    pub order_parameter: f64,
    pub delta: f64,
    pub trace: Vec<IterationLog>,
    pub seed: u64,
    pub evaluations: u64,
}

/// Objective seen by one VQE trial: each evaluation draws its shots from its
/// own stream of the trial seed; the preparation angles see the current drift.
struct TrialObjective<'a> {
    estimator: &'a EnergyEstimator,
    seed: u64,
    evaluations: u64,
    drift: DriftInjector,
}

impl Objective for TrialObjective<'_> {
    fn evaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        self.evaluations += 1;
        // Stream 0 belongs to the optimizer itself.
        let mut rng = stream_rng(self.seed, self.evaluations);
        self.estimator.estimate(&self.drift.apply(theta), &mut rng)
    }
}

/// Runs SPSA from `theta0` and reports the final point in the infinite-shot limit.
pub fn run_vqe(
    problem: &VqeProblem,
    theta0: ParamVector,
    iterations: u64,
    meta: &SpsaMeta,
    seed: u64,
) -> Result<TrialResult> {
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "iteration budget must be >= 1".into(),
        ));
    }
    meta.validate()?;
    let gains = mass_adjust(problem.mass, meta)?;
    let mut rng: SimRng = stream_rng(seed, 0);
    let mut objective = TrialObjective {
        estimator: &problem.estimator,
        seed,
        evaluations: 0,
        drift: DriftInjector::new(problem.drift_step)?,
    };

    let mut theta = theta0;
    let mut trace = Vec::with_capacity(iterations as usize);
    for k in 1..=iterations {
        objective.drift.advance(&mut rng);
        let (next, log) = spsa_step(&theta, k, &mut objective, &gains, &mut rng)?;
        theta = next;
        trace.push(log);
    }

    let realized = objective.drift.apply(&theta);
    let energy = problem.estimator.exact(&realized)?;
    let order_parameter =
        order_parameter_estimate(&realized, Shots::Exact, problem.estimator.noise(), &mut rng)?;
    let delta = accuracy_delta(energy, problem.mass)?.value();
    Ok(TrialResult {
        theta,
        energy,
        order_parameter,
        delta,
        trace,
        seed,
        evaluations: objective.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;

    fn gains(a0: f64, af: f64, b0: f64, bf: f64) -> Gains {
        SpsaMeta {
            a0,
            af,
            b0,
            bf,
            ..SpsaMeta::default()
        }
        .into()
    }

    #[test]
    fn schedule_examples() {
        let g = gains(0.05, 0.005, 0.1, 0.002);
        assert_eq!(schedule(1, &g).unwrap(), (0.05, 0.1));
        let (a, _) = schedule(32, &g).unwrap();
        // 32^0.602 = 2^3.01
        assert!((a - (0.045 / 2f64.powf(3.01) + 0.005)).abs() < 1e-15, "{a}");
        assert!((a - 0.0105).abs() < 1e-4);
        let g0 = gains(0.05, 0.0, 0.1, 0.0);
        let (a, _) = schedule(1_000_000, &g0).unwrap();
        assert!(a < 0.05e-3);
        assert!(schedule(0, &g).is_err());
    }

    #[test]
    fn schedule_decreases_to_floor() {
        let g = gains(0.05, 0.005, 0.1, 0.002);
        let mut prev = schedule(1, &g).unwrap();
        for k in 2..2000 {
            let cur = schedule(k, &g).unwrap();
            assert!(cur.0 < prev.0 && cur.1 < prev.1);
            assert!(cur.0 > 0.005 && cur.1 > 0.002);
            prev = cur;
        }
    }

    #[test]
    fn mass_adjust_examples() {
        let meta = SpsaMeta::default();
        assert_eq!(mass_adjust(0.0, &meta).unwrap(), Gains::from(meta));
        assert!((mass_adjust(2.0, &meta).unwrap().a0 - 0.05 / 1.4).abs() < 1e-15);
        assert!((mass_adjust(-8.0, &meta).unwrap().a0 - 0.05 / 2.6).abs() < 1e-15);
        assert!((mass_adjust(-5.0, &meta).unwrap().b0 - 0.1 / 2.0).abs() < 1e-15);
        assert!(mass_adjust(f64::NAN, &meta).is_err());
    }

    #[test]
    fn symmetric_bowl_has_zero_gradient_at_center() {
        let mut f = |t: &ParamVector| Ok(t.norm().powi(2));
        for bits in 0..64 {
            let (g, _, _) = gradient_estimate(
                &ParamVector::zeros(),
                &PerturbationVector::from_bits(bits),
                0.1,
                &mut f,
            )
            .unwrap();
            assert!(g.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn zero_step_leaves_point() {
        let g = gains(0.0, 0.0, 0.1, 0.0);
        let theta = ParamVector([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let mut f = |t: &ParamVector| Ok(t[0].sin() + t[3]);
        let (next, log) = spsa_step(&theta, 1, &mut f, &g, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(next, theta);
        assert_eq!(log.k, 1);
    }

    #[test]
    fn bad_perturbation_size_rejected() {
        let mut f = |_: &ParamVector| Ok(0.0);
        assert!(gradient_estimate(
            &ParamVector::zeros(),
            &PerturbationVector::from_bits(0),
            0.0,
            &mut f
        )
        .is_err());
    }

    #[test]
    fn objective_errors_propagate() {
        let mut f = |_: &ParamVector| Err(Error::Objective("detector offline".into()));
        let g = gains(0.05, 0.005, 0.1, 0.002);
        assert!(matches!(
            spsa_step(&ParamVector::zeros(), 1, &mut f, &g, &mut stream_rng(0, 0)),
            Err(Error::Objective(_))
        ));
    }

    #[test]
    fn meta_validation() {
        assert!(SpsaMeta::default().validate().is_ok());
        let bad = SpsaMeta {
            af: 0.1,
            ..SpsaMeta::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn run_vqe_rejects_empty_budget() {
        let p = VqeProblem::new(0.0, Shots::Exact, NoiseConfig::none()).unwrap();
        assert!(run_vqe(&p, ParamVector::zeros(), 0, &SpsaMeta::default(), 1).is_err());
    }

    #[test]
    fn run_vqe_single_iteration() {
        let p = VqeProblem::new(1.0, Shots::Count(100), NoiseConfig::none()).unwrap();
        let r = run_vqe(&p, ParamVector::zeros(), 1, &SpsaMeta::default(), 1).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.evaluations, 2);
    }
}
