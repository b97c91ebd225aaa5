//! Lattice Schwinger Hamiltonian as a Pauli-string sum.
//!
//! ```text
//! H_N = w Σ_{j<N} (X_j X_{j+1} + Y_j Y_{j+1}) + (m/2) Σ_j (−1)^j Z_j + g Σ_j L_j²
//! L_j = ε₀ − ½ Σ_{l≤j} (Z_l + (−1)^l)
//! ```
//!
//! Hopping convention: the pair-creation term `σ⁺_j σ⁻_{j+1} + h.c.` is scaled
//! so that XX and YY carry coefficient `w` (not `w/2`). With `w = g = 1`,
//! `ε₀ = 0`, `N = 2` this gives exactly
//! `𝟙 + XX + YY − ½Z₁ + ½Z₁Z₂ + (m/2)(Z₂ − Z₁)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    expectation, hermitian_eigen, pauli, ComplexMatrix, StateVector, MAX_QUBITS, TOL_CONSTRUCTION,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => pauli::identity(),
            Pauli::X => pauli::x(),
            Pauli::Y => pauli::y(),
            Pauli::Z => pauli::z(),
        }
    }

    /// Single-qubit product `self·other = phase·result`.
    pub fn compose(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; position 0 is qubit 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Self {
        Self(labels)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// Identity everywhere except the listed `(qubit index from 0, letter)` sites.
    pub fn with_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut labels = vec![Pauli::I; n];
        for &(q, p) in sites {
            labels[q] = p;
        }
        Self(labels)
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidParameter(format!("bad Pauli letter {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn compose(&self, other: &Self) -> (Complex64, Self) {
        assert_eq!(self.len(), other.len());
        let mut phase = Complex64::new(1.0, 0.0);
        let labels = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (p, l) = a.compose(b);
                phase *= p;
                l
            })
            .collect();
        (phase, Self(labels))
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        self.0
            .iter()
            .map(|p| p.matrix())
            .reduce(|acc, m| acc.kron(&m))
            .unwrap_or_else(|| ComplexMatrix::identity(1))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings, kept canonical: sorted by string,
/// duplicates merged, negligible coefficients dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTermSum {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliTermSum {
    pub fn new(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, s) in terms {
            if s.len() != num_qubits {
                return Err(Error::Dimension(format!(
                    "Pauli string {s} has length {} in a {num_qubits}-qubit sum",
                    s.len()
                )));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("Pauli coefficient"));
            }
            *merged.entry(s).or_insert(0.0) += c;
        }
        Ok(Self {
            num_qubits,
            terms: merged
                .into_iter()
                .filter(|(_, c)| c.abs() > TOL_CONSTRUCTION)
                .map(|(s, c)| (c, s))
                .collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Coefficient of `s`, zero if absent.
    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.terms
            .iter()
            .find(|(_, t)| t == s)
            .map_or(0.0, |(c, _)| *c)
    }

    /// Coefficients keyed by their string labels, e.g. `"ZI" -> -0.5`.
    pub fn coefficient_map(&self) -> BTreeMap<String, f64> {
        self.terms
            .iter()
            .map(|(c, s)| (s.to_string(), *c))
            .collect()
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.num_qubits > MAX_QUBITS {
            return Err(Error::Dimension(format!(
                "{} qubits exceeds the dense limit of {MAX_QUBITS}",
                self.num_qubits
            )));
        }
        let dim = 1usize << self.num_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            m = &m + &s.to_matrix().scale(Complex64::new(*c, 0.0));
        }
        Ok(m)
    }
}

/// Product of two sums that commute; the result must be Hermitian.
fn product(
    a: &[(Complex64, PauliString)],
    b: &[(Complex64, PauliString)],
) -> Vec<(Complex64, PauliString)> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, sa) in a {
        for (cb, sb) in b {
            let (phase, s) = sa.compose(sb);
            out.push((ca * cb * phase, s));
        }
    }
    out
}

fn into_real_sum(n: usize, terms: Vec<(Complex64, PauliString)>) -> Result<PauliTermSum> {
    let mut merged: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    for (c, s) in terms {
        *merged.entry(s).or_default() += c;
    }
    if let Some((s, c)) = merged.iter().find(|(_, c)| c.im.abs() > TOL_CONSTRUCTION) {
        log::error!("non-real coefficient {c} on {s}");
        return Err(Error::NotHermitian(c.im.abs()));
    }
    PauliTermSum::new(n, merged.into_iter().map(|(s, c)| (c.re, s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwingerConfig {
    pub num_qubits: usize,
    pub mass: f64,
    pub hopping: f64,
    pub coupling: f64,
    pub background_field: f64,
}

impl SchwingerConfig {
    pub fn new(num_qubits: usize, mass: f64) -> Self {
        Self {
            num_qubits,
            mass,
            hopping: 1.0,
            coupling: 1.0,
            background_field: 0.0,
        }
    }

    pub fn two_qubit(mass: f64) -> Self {
        Self::new(2, mass)
    }
}

/// `(−1)^j` for a 1-based site index.
fn alternating(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn build_schwinger(cfg: &SchwingerConfig) -> Result<PauliTermSum> {
    let n = cfg.num_qubits;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Schwinger chain needs at least 2 sites, got {n}"
        )));
    }
    if ![cfg.mass, cfg.hopping, cfg.coupling, cfg.background_field]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::NonFinite("Schwinger parameter"));
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut terms: Vec<(Complex64, PauliString)> = Vec::new();

    for j in 0..n - 1 {
        for p in [Pauli::X, Pauli::Y] {
            terms.push((
                re(cfg.hopping),
                PauliString::with_sites(n, &[(j, p), (j + 1, p)]),
            ));
        }
    }

    for j in 1..=n {
        terms.push((
            re(0.5 * cfg.mass * alternating(j)),
            PauliString::with_sites(n, &[(j - 1, Pauli::Z)]),
        ));
    }

    for j in 1..=n {
        let offset: f64 = cfg.background_field - 0.5 * (1..=j).map(alternating).sum::<f64>();
        let mut field = vec![(re(offset), PauliString::identity(n))];
        for l in 1..=j {
            field.push((re(-0.5), PauliString::with_sites(n, &[(l - 1, Pauli::Z)])));
        }
        for (c, s) in product(&field, &field) {
            terms.push((c * cfg.coupling, s));
        }
    }

    into_real_sum(n, terms)
}

/// `1/(2N(N−1)) Σ_{j>i} (1 + (−1)^i Z_i)(1 + (−1)^j Z_j)`; the `|VH⟩` projector at N = 2.
pub fn order_parameter_observable(num_qubits: usize) -> Result<PauliTermSum> {
    let n = num_qubits;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "order parameter needs at least 2 sites, got {n}"
        )));
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    let norm = 1.0 / (2.0 * (n * (n - 1)) as f64);
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let fi = [
                (re(1.0), PauliString::identity(n)),
                (
                    re(alternating(i)),
                    PauliString::with_sites(n, &[(i - 1, Pauli::Z)]),
                ),
            ];
            let fj = [
                (re(1.0), PauliString::identity(n)),
                (
                    re(alternating(j)),
                    PauliString::with_sites(n, &[(j - 1, Pauli::Z)]),
                ),
            ];
            for (c, s) in product(&fi, &fj) {
                terms.push((c * norm, s));
            }
        }
    }
    into_real_sum(n, terms)
}

/// Two-qubit spectrum, `ground ≤ e3 ≤ e2 ≤ top` (the paper's E₄ … E₁).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumInfo {
    pub ground: f64,
    pub e3: f64,
    pub e2: f64,
    pub top: f64,
    pub ground_state: StateVector,
}

impl SpectrumInfo {
    /// Levels in ascending order.
    pub fn levels(&self) -> [f64; 4] {
        [self.ground, self.e3, self.e2, self.top]
    }
}

/// `½ ∓ √(m² + m + 17/4)`; the extreme levels of H₂(m).
pub fn extreme_levels(m: f64) -> (f64, f64) {
    let root = (m * m + m + 4.25).sqrt();
    (0.5 - root, 0.5 + root)
}

pub fn analytic_spectrum(m: f64) -> Result<SpectrumInfo> {
    let (ground, top) = extreme_levels(m);
    let h = build_schwinger(&SchwingerConfig::two_qubit(m))?.to_matrix()?;
    let (_, vecs) = hermitian_eigen(&h)?;
    let ground_state = StateVector::normalized((0..4).map(|r| vecs[(r, 0)]).collect())?;
    Ok(SpectrumInfo {
        ground,
        e3: 1.0,
        e2: 2.0,
        top,
        ground_state,
    })
}

/// ⟨O⟩ in the exact two-qubit ground state.
pub fn exact_order_parameter(m: f64) -> Result<f64> {
    let spec = analytic_spectrum(m)?;
    expectation(
        &order_parameter_observable(2)?.to_matrix()?,
        &spec.ground_state,
    )
}

/// Relative closeness `(E − E₀)/(E₁ − E₀)` of an energy estimate to the ground level.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccuracyDelta(pub f64);

impl AccuracyDelta {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// δ for the two-qubit model; E₁ is the first level strictly above the ground.
pub fn accuracy_delta(energy: f64, m: f64) -> Result<AccuracyDelta> {
    let spec = analytic_spectrum_levels(m);
    let e0 = spec[0];
    let e1 = spec
        .iter()
        .copied()
        .find(|&e| e - e0 > TOL_CONSTRUCTION)
        .unwrap_or(e0);
    let gap = e1 - e0;
    if gap.abs() < TOL_CONSTRUCTION {
        return Err(Error::DegenerateGap(gap));
    }
    Ok(AccuracyDelta((energy - e0) / gap))
}

fn analytic_spectrum_levels(m: f64) -> [f64; 4] {
    let (g, t) = extreme_levels(m);
    [g, 1.0, 2.0, t]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ps(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn pauli_algebra() {
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(Pauli::X.compose(Pauli::Y), (i, Pauli::Z));
        assert_eq!(
            Pauli::Z.compose(Pauli::Z),
            (Complex64::new(1.0, 0.0), Pauli::I)
        );
        for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                let (ph, c) = a.compose(b);
                let lhs = &a.matrix() * &b.matrix();
                assert!(
                    lhs.max_abs_diff(&c.matrix().scale(ph)) < 1e-15,
                    "{a:?}{b:?}"
                );
            }
        }
    }

    #[test]
    fn two_qubit_massless() {
        let h = build_schwinger(&SchwingerConfig::two_qubit(0.0)).unwrap();
        let expected: BTreeMap<String, f64> = [
            ("II", 1.0),
            ("XX", 1.0),
            ("YY", 1.0),
            ("ZI", -0.5),
            ("ZZ", 0.5),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
        assert_eq!(h.coefficient_map(), expected);
    }

    #[test]
    fn two_qubit_mass_two() {
        let h = build_schwinger(&SchwingerConfig::two_qubit(2.0)).unwrap();
        assert_eq!(h.coefficient(&ps("IZ")), 1.0);
        assert_eq!(h.coefficient(&ps("ZI")), -1.5);
        assert_eq!(h.terms().len(), 6);
    }

    #[test]
    fn rejects_single_site() {
        assert!(build_schwinger(&SchwingerConfig::new(1, 0.0)).is_err());
        assert!(order_parameter_observable(1).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let s = analytic_spectrum(-0.5).unwrap();
        assert_eq!(s.ground, -1.5);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let singlet = StateVector::new(vec![ZERO, h, -h, ZERO]).unwrap();
        assert!((s.ground_state.fidelity(&singlet) - 1.0).abs() < 1e-12);

        assert!(
            (analytic_spectrum(0.0).unwrap().ground - (0.5 - 17f64.sqrt() / 2.0)).abs() < 1e-15
        );
        assert!((analytic_spectrum(0.0).unwrap().ground + 1.56155).abs() < 1e-5);
        assert!((analytic_spectrum(10.0).unwrap().ground + 10.18878).abs() < 1e-5);
    }

    #[test]
    fn order_parameter_is_vh_projector() {
        let o = order_parameter_observable(2).unwrap();
        let expected: BTreeMap<String, f64> =
            [("II", 0.25), ("IZ", 0.25), ("ZI", -0.25), ("ZZ", -0.25)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
        assert_eq!(o.coefficient_map(), expected);
        let m = o.to_matrix().unwrap();
        let b = |i| StateVector::basis(4, i).unwrap();
        assert_eq!(expectation(&m, &b(2)).unwrap(), 1.0);
        assert_eq!(expectation(&m, &b(1)).unwrap(), 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let singlet = StateVector::new(vec![ZERO, h, -h, ZERO]).unwrap();
        assert!((expectation(&m, &singlet).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn accuracy_delta_examples() {
        let (e0, _) = extreme_levels(0.3);
        assert_eq!(accuracy_delta(e0, 0.3).unwrap().value(), 0.0);
        assert_eq!(accuracy_delta(1.0, 0.3).unwrap().value(), 1.0);
        assert!((accuracy_delta(-1.45, -0.5).unwrap().value() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn exact_order_parameter_crosses_half_at_transition() {
        let below = exact_order_parameter(-0.5 - 1e-6).unwrap();
        let above = exact_order_parameter(-0.5 + 1e-6).unwrap();
        assert!(below > 0.5 && above < 0.5, "{below} {above}");
    }

    #[test]
    fn exact_order_parameter_reference_values() {
        let o0 = exact_order_parameter(0.0).unwrap();
        let o1 = exact_order_parameter(-1.0).unwrap();
        assert!((o0 - 0.38).abs() < 0.01, "{o0}");
        assert!((o1 - 0.62).abs() < 0.01, "{o1}");
        assert!((o0 + o1 - 1.0).abs() < 1e-9);
    }
}
