//! Polarization optics as a gate model.
//!
//! Encoding: `|0⟩ ≡ |H⟩`, `|1⟩ ≡ |V⟩`; two-qubit basis order is
//! `|HH⟩, |HV⟩, |VH⟩, |VV⟩` with qubit 1 the most significant bit.
//!
//! A waveplate with retardance δ and fast axis at θ acts as
//! `U(δ, θ) = V(θ)·D(δ)·V(θ)†` with `V(θ) = cos θ·𝟙 − i sin θ·σʸ` (a real
//! rotation) and `D(δ) = diag(1, e^{iδ})`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, I, ONE, TOL_PHYSICAL, ZERO};

/// Overlap a compiled measurement row must reach to be accepted.
pub const COMPILE_OVERLAP_MIN: f64 = 1.0 - 1e-9;

/// Reduces an angle to `[0, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs.
    if w >= PI {
        0.0
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSpec {
    pub retardance: f64,
    pub axis: f64,
}

impl WaveplateSpec {
    pub fn new(retardance: f64, axis: f64) -> Self {
        Self { retardance, axis }
    }

    pub fn half_wave(axis: f64) -> Self {
        Self::new(PI, axis)
    }

    pub fn quarter_wave(axis: f64) -> Self {
        Self::new(FRAC_PI_2, axis)
    }

    /// Same plate with the axis reduced to `[0, π)`.
    pub fn normalized(self) -> Self {
        Self::new(self.retardance, wrap_angle(self.axis))
    }
}

/// The frame rotation `V(θ) = cos θ·𝟙 − i sin θ·σʸ`.
pub fn frame_rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::mat2(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    )
}

/// `D(δ) = e^{iδ|1⟩⟨1|}`.
pub fn retarder(delta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[ONE, Complex64::from_polar(1.0, delta)])
}

pub fn waveplate_unitary(spec: WaveplateSpec) -> ComplexMatrix {
    // Expanded V·D·V† written with double angles so that θ and θ+π give the
    // same entries up to rounding of cos 2θ / sin 2θ.
    let (s2, c2) = (2.0 * spec.axis).sin_cos();
    let e = Complex64::from_polar(1.0, spec.retardance);
    let cc = 0.5 * (1.0 + c2);
    let ss = 0.5 * (1.0 - c2);
    let cs = 0.5 * s2;
    let off = (ONE - e) * cs;
    ComplexMatrix::mat2(ONE * cc + e * ss, off, off, ONE * ss + e * cc)
}

pub fn hwp(axis: f64) -> ComplexMatrix {
    waveplate_unitary(WaveplateSpec::half_wave(axis))
}

pub fn qwp(axis: f64) -> ComplexMatrix {
    waveplate_unitary(WaveplateSpec::quarter_wave(axis))
}

/// `U_HWP(hwp_axis)·U_QWP(qwp_axis)`: a quarter-wave plate followed by a half-wave plate.
pub fn plate_pair(qwp_axis: f64, hwp_axis: f64) -> ComplexMatrix {
    &hwp(hwp_axis) * &qwp(qwp_axis)
}

/// Controlled-X with qubit 1 as control.
pub fn controlled_x() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// The six waveplate angles of the ansatz, in radians.
///
/// Index 0/1: QWP/HWP acting on the pump (state preparation).
/// Index 2/3: QWP/HWP on photon 1. Index 4/5: QWP/HWP on photon 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub [f64; 6]);

impl ParamVector {
    pub const LEN: usize = 6;

    pub fn new(angles: [f64; 6]) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("waveplate angle"));
        }
        Ok(Self(angles))
    }

    pub fn zeros() -> Self {
        Self([0.0; 6])
    }

    pub fn as_array(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn prep(&self) -> (f64, f64) {
        (self.0[0], self.0[1])
    }

    pub fn local1(&self) -> (f64, f64) {
        (self.0[2], self.0[3])
    }

    pub fn local2(&self) -> (f64, f64) {
        (self.0[4], self.0[5])
    }

    /// Each coordinate reduced to `[0, π)`, the period of every waveplate.
    pub fn wrapped(&self) -> Self {
        Self(self.0.map(wrap_angle))
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self(self.0.map(f))
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(self.0[i], other.0[i]);
        }
        Self(out)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// `α|HV⟩ + β|VH⟩` coefficients of the source state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialStateAmplitudes {
    pub alpha: Complex64,
    pub beta: Complex64,
}

/// Source state `α|HV⟩ + β|VH⟩`, obtained from `HWP(θ₂)·QWP(θ₁)|0⟩ ⊗ X|0⟩`
/// followed by the controlled-X.
pub fn initial_state(theta1: f64, theta2: f64) -> (StateVector, InitialStateAmplitudes) {
    let u = plate_pair(theta1, theta2);
    let alpha = u[(0, 0)];
    let beta = u[(1, 0)];
    let state = StateVector::new(vec![ZERO, alpha, beta, ZERO])
        .expect("plate pair is unitary so the state is normalized");
    (state, InitialStateAmplitudes { alpha, beta })
}

/// `(a ⊗ b)|ψ⟩` for a two-qubit state.
pub fn apply_local_pair(a: &ComplexMatrix, b: &ComplexMatrix, psi: &[Complex64]) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for k1 in 0..2 {
        for k2 in 0..2 {
            let mut acc = ZERO;
            for j1 in 0..2 {
                for j2 in 0..2 {
                    acc += a[(k1, j1)] * b[(k2, j2)] * psi[2 * j1 + j2];
                }
            }
            out[2 * k1 + k2] = acc;
        }
    }
    out
}

/// `|ψ(θ)⟩ = U₁(θ₃, θ₄) ⊗ U₂(θ₅, θ₆) |ψ_in(θ₁, θ₂)⟩`.
pub fn ansatz_state(params: &ParamVector) -> StateVector {
    let (t1, t2) = params.prep();
    let (t3, t4) = params.local1();
    let (t5, t6) = params.local2();
    let (psi_in, _) = initial_state(t1, t2);
    let amps = apply_local_pair(
        &plate_pair(t3, t4),
        &plate_pair(t5, t6),
        psi_in.amplitudes(),
    );
    StateVector::new(amps.to_vec()).expect("local unitaries preserve the norm")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    Z,
    X,
    Y,
    Custom,
}

/// A single-qubit basis change `B` applied right before an H/V measurement.
///
/// Each standard rotation maps the +1 eigenvector of its Pauli operator to
/// `|H⟩` and the −1 eigenvector to `|V⟩`:
///
/// * Z: `B = 𝟙`
/// * X: `B = (1/√2)[[1, 1], [1, −1]]` (Hadamard)
/// * Y: `B = (1/√2)[[1, −i], [1, i]]` (Hadamard·S†)
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRotation {
    matrix: ComplexMatrix,
    label: BasisLabel,
}

impl BasisRotation {
    pub fn z() -> Self {
        Self {
            matrix: ComplexMatrix::identity(2),
            label: BasisLabel::Z,
        }
    }

    pub fn x() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            matrix: ComplexMatrix::mat2(h, h, h, -h),
            label: BasisLabel::X,
        }
    }

    pub fn y() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            matrix: ComplexMatrix::mat2(h, -I * h, h, I * h),
            label: BasisLabel::Y,
        }
    }

    pub fn custom(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Dimension("basis rotation must be 2x2".into()));
        }
        let defect = matrix.unitarity_defect();
        if defect > TOL_PHYSICAL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            matrix,
            label: BasisLabel::Custom,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> BasisLabel {
        self.label
    }
}

/// Row `⟨H|·M` of a 2×2 matrix.
fn h_row(m: &ComplexMatrix) -> [Complex64; 2] {
    [m[(0, 0)], m[(0, 1)]]
}

/// 1 − |⟨row a, row b⟩|² for unit rows.
fn row_mismatch(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let ov = a[0] * b[0].conj() + a[1] * b[1].conj();
    (1.0 - ov.norm_sqr()).max(0.0)
}

/// Finds waveplate angles `(θ₃′, θ₄′)` in `[0, π)` with
/// `⟨H|·B·U_HWP(θ₄)·U_QWP(θ₃) = ⟨H|·U_HWP(θ₄′)·U_QWP(θ₃′)` up to a global phase.
///
/// The target row, read as a polarization vector `v`, must be mapped onto
/// `|H⟩` by the plate pair. The quarter-wave plate is aligned with the major
/// axis of `v`'s polarization ellipse, which makes it linear; the half-wave
/// plate then reflects that linear polarization onto H.
pub fn compile_basis_change(b: &BasisRotation, theta3: f64, theta4: f64) -> Result<(f64, f64)> {
    let target = h_row(&(b.matrix() * &plate_pair(theta3, theta4)));
    let (q, h) = solve_plate_pair_for_row(&target);
    let q = wrap_angle(q);
    let h = wrap_angle(h);

    let residual = row_mismatch(&h_row(&plate_pair(q, h)), &target);
    if residual > 1.0 - COMPILE_OVERLAP_MIN {
        return Err(Error::NoConvergence {
            what: "basis compilation",
            residual,
        });
    }
    Ok((q, h))
}

/// Plate angles `(qwp, hwp)` whose pair has `⟨H|` row proportional to `row`.
fn solve_plate_pair_for_row(row: &[Complex64; 2]) -> (f64, f64) {
    // U·v ∝ |H⟩ with v = row†.
    let v = [row[0].conj(), row[1].conj()];
    let s1 = v[0].norm_sqr() - v[1].norm_sqr();
    let s2 = 2.0 * (v[0].conj() * v[1]).re;
    let qwp_axis = 0.5 * s2.atan2(s1);

    let lin = qwp(qwp_axis)
        .apply(&v)
        .expect("2x2 matrix applied to a 2-vector");
    // Strip the global phase; what remains is real up to rounding.
    let pivot = if lin[0].norm() >= lin[1].norm() {
        lin[0]
    } else {
        lin[1]
    };
    let unphase = pivot.conj() / pivot.norm();
    let x = (lin[0] * unphase).re;
    let y = (lin[1] * unphase).re;
    let hwp_axis = 0.5 * y.atan2(x);
    (qwp_axis, hwp_axis)
}

/// The four maximally entangled two-qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn state(self) -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let amps = match self {
            BellState::PhiPlus => vec![h, ZERO, ZERO, h],
            BellState::PhiMinus => vec![h, ZERO, ZERO, -h],
            BellState::PsiPlus => vec![ZERO, h, h, ZERO],
            BellState::PsiMinus => vec![ZERO, h, -h, ZERO],
        };
        StateVector::new(amps).expect("Bell states are normalized")
    }

    /// Classifies `state` as a Bell state (up to global phase).
    pub fn identify(state: &StateVector) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::Dimension("Bell states live in dimension 4".into()));
        }
        let (best, fid) = Self::ALL
            .iter()
            .map(|b| (*b, b.state().fidelity(state)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if fid < 1.0 - 1e-8 {
            return Err(Error::NotBellState(fid));
        }
        Ok(best)
    }

    /// Local unitaries `(W₁, W₂)` with `|Ψ⁻⟩ ∝ (W₁ ⊗ W₂)|self⟩`.
    pub fn to_singlet(self) -> (ComplexMatrix, ComplexMatrix) {
        use crate::linalg::pauli;
        match self {
            BellState::PsiMinus => (pauli::identity(), pauli::identity()),
            BellState::PsiPlus => (pauli::z(), pauli::identity()),
            BellState::PhiPlus => (pauli::z(), pauli::x()),
            BellState::PhiMinus => (pauli::identity(), pauli::x()),
        }
    }
}

/// `(W₁†·U·W₁) ⊗ (W₂†·U·W₂)`, a local unitary leaving `bell` invariant up to phase.
pub fn bell_invariant_transform(bell: &StateVector, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::Dimension("local unitary must be 2x2".into()));
    }
    let defect = u.unitarity_defect();
    if defect > TOL_PHYSICAL {
        return Err(Error::NotUnitary(defect));
    }
    let kind = BellState::identify(bell)?;
    let (w1, w2) = kind.to_singlet();
    let a = &(&w1.dagger() * u) * &w1;
    let b = &(&w2.dagger() * u) * &w2;
    Ok(a.kron(&b))
}
