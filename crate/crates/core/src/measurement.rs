//! Measurement pipeline of the two-photon setup.
//!
//! An evaluation prepares the ansatz state with the local waveplates
//! recompiled for the requested basis, optionally passes it through the
//! liquid-crystal dephasing channel(s), and projects onto H/V. Pauli
//! expectations are read off the four coincidence outcomes.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator, TOL_CONSTRUCTION};
use crate::photonics::{
    apply_local_pair, compile_basis_change, frame_rotation, initial_state, plate_pair,
    BasisRotation, ParamVector,
};
use crate::schwinger::{Pauli, PauliString, PauliTermSum};

/// Default LCVR axis angle.
pub const LCVR_AXIS: f64 = FRAC_PI_4;
/// Default LCVR mean retardance.
pub const LCVR_RETARDANCE: f64 = 2.0 * PI;
/// Shots per setting per evaluation when not configured.
pub const DEFAULT_SHOTS: u64 = 1000;

/// Index of the `|VH⟩` outcome in `[HH, HV, VH, VV]`.
pub const VH: usize = 2;

/// Two-operator dephasing channel `ρ ↦ Σ_j E_j ρ E_j†` with
/// `E_j = V(θ)·D_j(δ)·V(θ)†`,
/// `D₁ = √((2−ε)/2)·diag(e^{iδ}, 1)` and `D₂ = √(ε/2)·diag(e^{iδ}, −1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    epsilon: f64,
    axis: f64,
    retardance: f64,
}

impl KrausChannel {
    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn axis(&self) -> f64 {
        self.axis
    }

    pub fn retardance(&self) -> f64 {
        self.retardance
    }

    /// ‖Σ E†E − 𝟙‖_F
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(2, 2);
        for e in &self.operators {
            sum = &sum + &(&e.dagger() * e);
        }
        (&sum - &ComplexMatrix::identity(2)).frobenius_norm()
    }
}

pub fn dephasing_channel(epsilon: f64, axis: f64, retardance: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "noise strength {epsilon} outside [0, 1]"
        )));
    }
    if !axis.is_finite() || !retardance.is_finite() {
        return Err(Error::NonFinite("channel angle"));
    }
    let phase = Complex64::from_polar(1.0, retardance);
    let w1 = Complex64::new(((2.0 - epsilon) / 2.0).sqrt(), 0.0);
    let w2 = Complex64::new((epsilon / 2.0).sqrt(), 0.0);
    let one = Complex64::new(1.0, 0.0);
    let d1 = ComplexMatrix::from_diagonal(&[phase * w1, one * w1]);
    let d2 = ComplexMatrix::from_diagonal(&[phase * w2, -one * w2]);
    let v = frame_rotation(axis);
    let vd = v.dagger();
    let operators = vec![&(&v * &d1) * &vd, &(&v * &d2) * &vd];
    Ok(KrausChannel {
        operators,
        epsilon,
        axis,
        retardance,
    })
}

/// Applies `ch` to qubit `qubit` (1-based) of an N-qubit density operator.
pub fn apply_channel(
    rho: &DensityOperator,
    ch: &KrausChannel,
    qubit: usize,
) -> Result<DensityOperator> {
    let dim = rho.dim();
    let n = dim.trailing_zeros() as usize;
    if qubit == 0 || qubit > n {
        return Err(Error::QubitIndex {
            index: qubit,
            qubits: n,
        });
    }
    let before = ComplexMatrix::identity(1 << (qubit - 1));
    let after = ComplexMatrix::identity(1 << (n - qubit));
    let mut out = ComplexMatrix::zeros(dim, dim);
    for e in ch.operators() {
        let full = before.kron(e).kron(&after);
        out = &out + &(&(&full * rho.matrix()) * &full.dagger());
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    #[default]
    None,
    Qubit1,
    Both,
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::None => "none",
            NoiseMode::Qubit1 => "qubit1",
            NoiseMode::Both => "both",
        })
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseMode::None),
            "qubit1" => Ok(NoiseMode::Qubit1),
            "both" => Ok(NoiseMode::Both),
            other => Err(Error::Config(format!(
                "unknown noise mode {other:?} (expected none, qubit1 or both)"
            ))),
        }
    }
}

/// Where and how strongly the LCVR channel acts.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub mode: NoiseMode,
    channel: Option<KrausChannel>,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            mode: NoiseMode::None,
            channel: None,
        }
    }

    /// Channel with the default LCVR axis and retardance.
    pub fn new(mode: NoiseMode, epsilon: f64) -> Result<Self> {
        Self::with_lcvr(mode, epsilon, LCVR_AXIS, LCVR_RETARDANCE)
    }

    pub fn with_lcvr(mode: NoiseMode, epsilon: f64, axis: f64, retardance: f64) -> Result<Self> {
        let channel = dephasing_channel(epsilon, axis, retardance)?;
        Ok(Self {
            mode,
            channel: (mode != NoiseMode::None).then_some(channel),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.channel.as_ref().map_or(0.0, |c| c.epsilon())
    }

    pub fn channel(&self) -> Option<&KrausChannel> {
        self.channel.as_ref()
    }

    fn noisy_qubits(&self) -> &'static [usize] {
        match self.mode {
            NoiseMode::None => &[],
            NoiseMode::Qubit1 => &[1],
            NoiseMode::Both => &[1, 2],
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::none()
    }
}

/// Number of shots per setting, or the infinite-shot limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shots {
    Exact,
    Count(u64),
}

impl Default for Shots {
    fn default() -> Self {
        Shots::Count(DEFAULT_SHOTS)
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) => Err(Error::Config("shot count must be positive".into())),
            Ok(n) => Ok(Shots::Count(n)),
            Err(_) => Err(Error::Config(format!(
                "shots must be a positive integer or \"exact\", got {s:?}"
            ))),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("shot count must be positive")),
            Raw::Num(n) => Ok(Shots::Count(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One joint measurement basis (a letter per qubit) and the Hamiltonian terms read from it.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetting {
    letters: Vec<Pauli>,
    terms: Vec<(f64, PauliString)>,
}

impl MeasurementSetting {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self {
            letters,
            terms: Vec::new(),
        }
    }

    pub fn zz() -> Self {
        Self::new(vec![Pauli::Z, Pauli::Z])
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn label(&self) -> String {
        PauliString::new(self.letters.clone()).to_string()
    }

    fn covers(&self, s: &PauliString) -> bool {
        s.labels()
            .iter()
            .zip(&self.letters)
            .all(|(&p, &l)| p == Pauli::I || p == l)
    }

    /// Compiled plate angles `(θ₃′, θ₄′, θ₅′, θ₆′)` realizing this setting on top of `params`.
    pub fn compile(&self, params: &ParamVector) -> Result<[f64; 4]> {
        if self.letters.len() != 2 {
            return Err(Error::Dimension(format!(
                "photonic settings are two-qubit, got {}",
                self.letters.len()
            )));
        }
        let (t3, t4) = params.local1();
        let (t5, t6) = params.local2();
        let (a, b) = compile_basis_change(&basis_for(self.letters[0]), t3, t4)?;
        let (c, d) = compile_basis_change(&basis_for(self.letters[1]), t5, t6)?;
        Ok([a, b, c, d])
    }
}

pub fn basis_for(letter: Pauli) -> BasisRotation {
    match letter {
        Pauli::X => BasisRotation::x(),
        Pauli::Y => BasisRotation::y(),
        Pauli::Z | Pauli::I => BasisRotation::z(),
    }
}

/// Groups the terms of `h` into joint single-letter-per-qubit settings.
///
/// Heavier strings claim settings first; unconstrained qubits default to Z.
/// Each term is read from exactly one setting and the identity term is
/// attached to the first.
pub fn measurement_settings_for(h: &PauliTermSum) -> Result<Vec<MeasurementSetting>> {
    let n = h.num_qubits();
    let mut order: Vec<&(f64, PauliString)> = h.terms().iter().collect();
    // Stable sort keeps canonical order among equal weights.
    order.sort_by_key(|(_, s)| std::cmp::Reverse(s.weight()));

    // Per setting: the letters fixed so far and the terms it reads.
    type Partial = (Vec<Option<Pauli>>, Vec<(f64, PauliString)>);
    let mut partial: Vec<Partial> = Vec::new();
    let mut identity = Vec::new();
    for (c, s) in order {
        if s.is_identity() {
            identity.push((*c, s.clone()));
            continue;
        }
        let slot = partial.iter().position(|(letters, _)| {
            s.labels()
                .iter()
                .zip(letters)
                .all(|(&p, l)| p == Pauli::I || l.is_none() || *l == Some(p))
        });
        let idx = match slot {
            Some(i) => i,
            None => {
                partial.push((vec![None; n], Vec::new()));
                partial.len() - 1
            }
        };
        let (letters, terms) = &mut partial[idx];
        for (l, &p) in letters.iter_mut().zip(s.labels()) {
            if p != Pauli::I {
                *l = Some(p);
            }
        }
        terms.push((*c, s.clone()));
    }

    let mut settings: Vec<MeasurementSetting> = partial
        .into_iter()
        .map(|(letters, terms)| MeasurementSetting {
            letters: letters.into_iter().map(|l| l.unwrap_or(Pauli::Z)).collect(),
            terms,
        })
        .collect();
    if settings.is_empty() {
        settings.push(MeasurementSetting::new(vec![Pauli::Z; n]));
    }
    settings[0].terms.extend(identity);

    for (_, s) in h.terms() {
        if !settings.iter().any(|st| st.covers(s)) {
            return Err(Error::UncoverableTerm(s.to_string()));
        }
    }
    Ok(settings)
}

/// Density-operator path: channel(s) then computational-basis readout.
fn noisy_readout(amps: &[Complex64; 4], noise: &NoiseConfig) -> Result<[f64; 4]> {
    let Some(ch) = noise.channel() else {
        return Ok(amps.map(|a| a.norm_sqr()));
    };
    let mut m = ComplexMatrix::zeros(4, 4);
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = amps[r] * amps[c].conj();
        }
    }
    let mut rho = DensityOperator::from_matrix_unchecked(m);
    for &q in noise.noisy_qubits() {
        rho = apply_channel(&rho, ch, q)?;
    }
    let p = rho.probabilities();
    Ok([p[0], p[1], p[2], p[3]])
}

/// Outcome probabilities `[HH, HV, VH, VV]` for `setting`, using the compiled plate angles.
pub fn outcome_probabilities(
    params: &ParamVector,
    setting: &MeasurementSetting,
    noise: &NoiseConfig,
) -> Result<[f64; 4]> {
    let [a, b, c, d] = setting.compile(params)?;
    let (t1, t2) = params.prep();
    let (psi_in, _) = initial_state(t1, t2);
    let amps = apply_local_pair(&plate_pair(a, b), &plate_pair(c, d), psi_in.amplitudes());
    noisy_readout(&amps, noise)
}

/// Reference path: prepare the ansatz state, then apply the basis matrices directly.
pub fn direct_probabilities(
    params: &ParamVector,
    setting: &MeasurementSetting,
    noise: &NoiseConfig,
) -> Result<[f64; 4]> {
    if setting.letters().len() != 2 {
        return Err(Error::Dimension("photonic settings are two-qubit".into()));
    }
    let (t3, t4) = params.local1();
    let (t5, t6) = params.local2();
    let m1 = basis_for(setting.letters()[0]).matrix() * &plate_pair(t3, t4);
    let m2 = basis_for(setting.letters()[1]).matrix() * &plate_pair(t5, t6);
    let (t1, t2) = params.prep();
    let (psi_in, _) = initial_state(t1, t2);
    let amps = apply_local_pair(&m1, &m2, psi_in.amplitudes());
    noisy_readout(&amps, noise)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    /// Counts for `[HH, HV, VH, VV]`.
    pub counts: [u64; 4],
    pub total: u64,
}

impl ShotCounts {
    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.total.max(1) as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

/// Multinomial draw of `n` shots via a chain of conditional binomials.
pub fn sample_shots<R: Rng + ?Sized>(probs: &[f64; 4], n: u64, rng: &mut R) -> ShotCounts {
    let mut counts = [0u64; 4];
    let mut remaining = n;
    let mut mass = 1.0;
    for i in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = probs[i].max(0.0);
        let cond = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if cond >= 1.0 {
            remaining
        } else if cond <= 0.0 {
            0
        } else {
            Binomial::new(remaining, cond)
                .expect("probability clamped to [0, 1]")
                .sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts[3] = remaining;
    ShotCounts { counts, total: n }
}

/// Parity mask of a two-qubit string over outcome indices (qubit 1 is the high bit).
fn parity_mask(s: &PauliString) -> usize {
    s.labels()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .map(|(q, _)| 1usize << (s.len() - 1 - q))
        .fold(0, |a, b| a | b)
}

/// Sign-weighted average `Σ_k f_k (−1)^{parity(k & mask)}`.
fn pauli_from_frequencies(freq: &[f64; 4], mask: usize) -> f64 {
    freq.iter()
        .enumerate()
        .map(|(k, f)| {
            if (k & mask).count_ones().is_multiple_of(2) {
                *f
            } else {
                -f
            }
        })
        .sum()
}

/// Energy estimator for a fixed Hamiltonian, shot budget and noise model.
#[derive(Clone, Debug)]
pub struct EnergyEstimator {
    settings: Vec<MeasurementSetting>,
    shots: Shots,
    noise: NoiseConfig,
}

impl EnergyEstimator {
    pub fn new(h: &PauliTermSum, shots: Shots, noise: NoiseConfig) -> Result<Self> {
        if h.num_qubits() != 2 {
            return Err(Error::Dimension(format!(
                "the photonic ansatz has 2 qubits, Hamiltonian has {}",
                h.num_qubits()
            )));
        }
        Ok(Self {
            settings: measurement_settings_for(h)?,
            shots,
            noise,
        })
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    /// Estimate using the configured shot budget.
    pub fn estimate<R: Rng + ?Sized>(&self, params: &ParamVector, rng: &mut R) -> Result<f64> {
        match self.shots {
            Shots::Exact => self.exact(params),
            Shots::Count(n) => self.evaluate(params, |p| sample_shots(p, n, rng).frequencies()),
        }
    }

    /// Infinite-shot value (noise still applies).
    pub fn exact(&self, params: &ParamVector) -> Result<f64> {
        self.evaluate(params, |p| *p)
    }

    fn evaluate(
        &self,
        params: &ParamVector,
        mut readout: impl FnMut(&[f64; 4]) -> [f64; 4],
    ) -> Result<f64> {
        let mut energy = 0.0;
        for setting in &self.settings {
            let freq = readout(&outcome_probabilities(params, setting, &self.noise)?);
            for (c, s) in setting.terms() {
                energy += c * pauli_from_frequencies(&freq, parity_mask(s));
            }
        }
        Ok(energy)
    }
}

/// Standalone energy estimate; builds the setting plan on every call.
pub fn energy_estimate<R: Rng + ?Sized>(
    params: &ParamVector,
    h: &PauliTermSum,
    shots: Shots,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<f64> {
    EnergyEstimator::new(h, shots, noise.clone())?.estimate(params, rng)
}

/// ⟨O⟩ as the `|VH⟩` frequency of the ZZ setting.
pub fn order_parameter_estimate<R: Rng + ?Sized>(
    params: &ParamVector,
    shots: Shots,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<f64> {
    let probs = outcome_probabilities(params, &MeasurementSetting::zz(), noise)?;
    Ok(match shots {
        Shots::Exact => probs[VH],
        Shots::Count(n) => sample_shots(&probs, n, rng).frequencies()[VH],
    })
}

/// Random-walk offset on the two preparation angles, mimicking slow
/// polarization drift in the fibers between source and analyzers.
#[derive(Clone, Debug)]
pub struct DriftInjector {
    step: f64,
    offset: [f64; 2],
}

impl DriftInjector {
    /// Offsets are kept within one waveplate period.
    pub const BOUND: f64 = PI;

    pub fn new(step: f64) -> Result<Self> {
        if !(step >= 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "drift step {step} must be >= 0"
            )));
        }
        Ok(Self {
            step,
            offset: [0.0; 2],
        })
    }

    pub fn is_active(&self) -> bool {
        self.step > 0.0
    }

    pub fn offset(&self) -> [f64; 2] {
        self.offset
    }

    /// One Gaussian step of standard deviation `step` per coordinate.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [f64; 2] {
        if self.is_active() {
            let normal = Normal::new(0.0, self.step).expect("finite positive step");
            for o in &mut self.offset {
                *o = (*o + normal.sample(rng)).clamp(-Self::BOUND, Self::BOUND);
            }
        }
        self.offset
    }

    /// Parameters as the hardware actually realizes them.
    pub fn apply(&self, params: &ParamVector) -> ParamVector {
        let mut p = *params;
        p[0] += self.offset[0];
        p[1] += self.offset[1];
        p
    }
}

/// Probabilities sum to one within the physical tolerance.
pub fn is_distribution(p: &[f64; 4]) -> bool {
    p.iter().all(|&x| x >= -TOL_CONSTRUCTION) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-10
}
