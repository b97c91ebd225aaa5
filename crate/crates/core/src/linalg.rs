//! Dense complex linear algebra at the sizes this simulator needs.
//!
//! Matrices are stored row-major. Nothing here is tuned for large dimensions;
//! the general Hamiltonian builder is capped at [`MAX_QUBITS`] qubits.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic construction identities.
pub const TOL_CONSTRUCTION: f64 = 1e-12;
/// Tolerance for physical invariants (normalization, trace, positivity).
pub const TOL_PHYSICAL: f64 = 1e-10;
/// Tolerance for results of iterative procedures.
pub const TOL_ITERATIVE: f64 = 1e-9;

/// Largest register the dense builders accept.
pub const MAX_QUBITS: usize = 12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    /// 2×2 matrix from its four entries, row by row.
    pub fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// ‖M − M†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// ‖M†M − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = &self.dagger() * self;
        (&prod - &Self::identity(self.rows)).frobenius_norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < TOL_CONSTRUCTION
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < TOL_PHYSICAL
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Single-qubit Pauli matrices and identity.
pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::mat2(ZERO, ONE, ONE, ZERO)
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::mat2(ZERO, -I, I, ZERO)
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::mat2(ONE, ZERO, ZERO, -ONE)
    }
}

/// Normalized pure state of a `2^N`-level register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "state dimension {} is not a power of two",
                amplitudes.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL_PHYSICAL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(amplitudes)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Born-rule probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.apply(&self.amplitudes)?)
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        DensityOperator { matrix: m }
    }
}

/// Mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "density operator must be 2^N square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.hermiticity_defect() > TOL_PHYSICAL {
            return Err(Error::NotHermitian(matrix.hermiticity_defect()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_PHYSICAL || tr.im.abs() > TOL_PHYSICAL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let (vals, _) = hermitian_eigen(&symmetrize(&matrix))?;
        if vals[0] < -TOL_PHYSICAL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Skips validation; callers guarantee the invariants (channel outputs).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Diagonal of ρ, i.e. computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigen(&symmetrize(&self.matrix))?.0[0])
    }
}

/// Averages M with M† to remove rounding-level anti-Hermitian residue.
fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.dagger()).scale(Complex64::new(0.5, 0.0))
}

/// States an observable can be evaluated on.
pub trait QuantumState {
    fn dim(&self) -> usize;

    /// Unchecked ⟨obs⟩ including any imaginary part.
    fn raw_expectation(&self, obs: &ComplexMatrix) -> Complex64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn raw_expectation(&self, obs: &ComplexMatrix) -> Complex64 {
        let applied = obs
            .apply(&self.amplitudes)
            .expect("dimension checked by caller");
        self.amplitudes
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl QuantumState for DensityOperator {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn raw_expectation(&self, obs: &ComplexMatrix) -> Complex64 {
        // Tr(ρ·O) without forming the product.
        let n = self.dim();
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += self.matrix[(r, c)] * obs[(c, r)];
            }
        }
        acc
    }
}

/// Expectation value of a Hermitian observable.
pub fn expectation<S: QuantumState>(obs: &ComplexMatrix, state: &S) -> Result<f64> {
    if !obs.is_square() || obs.rows() != state.dim() {
        return Err(Error::Dimension(format!(
            "observable {}x{} on state of dimension {}",
            obs.rows(),
            obs.cols(),
            state.dim()
        )));
    }
    let defect = obs.hermiticity_defect();
    if defect > TOL_CONSTRUCTION * (1.0 + obs.frobenius_norm()) {
        return Err(Error::NotHermitian(defect));
    }
    let value = state.raw_expectation(obs);
    debug_assert!(
        value.im.abs() < TOL_PHYSICAL * (1.0 + obs.frobenius_norm()),
        "imaginary residue {} in Hermitian expectation",
        value.im
    );
    Ok(value.re)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are the
/// matching eigenvectors.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermiticity_defect();
    if defect > TOL_CONSTRUCTION * (1.0 + a.frobenius_norm()) {
        return Err(Error::NotHermitian(defect));
    }

    let n = a.rows();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 100;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver",
            residual: (0..n)
                .flat_map(|p| (0..n).map(move |q| (p, q)))
                .filter(|(p, q)| p != q)
                .map(|(p, q)| m[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok((values, vectors))
}

/// Zeroes `m[(p, q)]` with the unitary G = P·J, where P rephases column q so the
/// pivot is real and J is the classical real Jacobi rotation.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Entries of G in the (p, q) plane.
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = m.rows();
    // M ← M·G
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
    // M ← G†·M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    // V ← V·G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn singlet() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![ZERO, c(h, 0.0), c(-h, 0.0), ZERO]).unwrap()
    }

    #[test]
    fn kron_identities() {
        let i4 = pauli::identity().kron(&pauli::identity());
        assert_eq!(i4, ComplexMatrix::identity(4));

        let zi = pauli::z().kron(&pauli::identity());
        let expected = ComplexMatrix::from_diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert_eq!(zi, expected);

        let xx = pauli::x().kron(&pauli::x());
        let out = xx
            .apply(StateVector::basis(4, 0).unwrap().amplitudes())
            .unwrap();
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn dagger_examples() {
        assert_eq!(
            ComplexMatrix::identity(3).dagger(),
            ComplexMatrix::identity(3)
        );
        let d = ComplexMatrix::from_diagonal(&[ONE, I]);
        assert_eq!(d.dagger(), ComplexMatrix::from_diagonal(&[ONE, -I]));
        assert_eq!(pauli::y().dagger(), pauli::y());
    }

    #[test]
    fn expectation_examples() {
        let zero = StateVector::basis(2, 0).unwrap();
        assert_eq!(expectation(&pauli::z(), &zero).unwrap(), 1.0);

        let zz = pauli::z().kron(&pauli::z());
        assert!((expectation(&zz, &singlet()).unwrap() + 1.0).abs() < 1e-15);

        let rho = singlet().to_density();
        assert!((expectation(&zz, &rho).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_bad_input() {
        let zero = StateVector::basis(2, 0).unwrap();
        let zz = pauli::z().kron(&pauli::z());
        assert!(matches!(expectation(&zz, &zero), Err(Error::Dimension(_))));
        let raising = ComplexMatrix::mat2(ZERO, ONE, ZERO, ZERO);
        assert!(matches!(
            expectation(&raising, &zero),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn eigen_of_paulis() {
        let (vals, vecs) = hermitian_eigen(&pauli::z()).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-15);

        let (vals, _) = hermitian_eigen(&pauli::x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);

        let (vals, _) = hermitian_eigen(&pauli::y()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::mat2(ONE, ONE, ZERO, ONE);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(ComplexMatrix::identity(2)).is_err());
        let bad = ComplexMatrix::from_diagonal(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(
            DensityOperator::new(bad),
            Err(Error::InvalidDensity(_))
        ));
        let rho = DensityOperator::maximally_mixed(4);
        assert!((rho.purity() - 0.25).abs() < 1e-15);
        assert!(DensityOperator::new(rho.matrix().clone()).is_ok());
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
    }

    fn arb_mat(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(arb_c(), n * n)
            .prop_map(move |d| ComplexMatrix::from_row_major(n, n, d).unwrap())
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        arb_mat(n).prop_map(|m| (&m + &m.dagger()).scale(c(0.5, 0.0)))
    }

    proptest! {
        #[test]
        fn kron_mixed_product(a in arb_mat(2), b in arb_mat(2), cm in arb_mat(2), d in arb_mat(2)) {
            let lhs = &a.kron(&b) * &cm.kron(&d);
            let rhs = (&a * &cm).kron(&(&b * &d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn dagger_is_involution(a in arb_mat(3)) {
            prop_assert_eq!(a.dagger().dagger(), a);
        }

        #[test]
        fn eigenpairs_satisfy_definition(a in prop_oneof![arb_hermitian(2), arb_hermitian(4), arb_hermitian(8)]) {
            let (vals, vecs) = hermitian_eigen(&a).unwrap();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(vecs.unitarity_defect() < 1e-10);
            let n = a.rows();
            for (j, &lambda) in vals.iter().enumerate() {
                let col: Vec<Complex64> = (0..n).map(|r| vecs[(r, j)]).collect();
                let av = a.apply(&col).unwrap();
                let resid: f64 = av.iter().zip(&col).map(|(x, y)| (x - y * lambda).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(resid < 1e-9, "residual {resid}");
            }
        }
    }
}
