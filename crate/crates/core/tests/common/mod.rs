#![allow(dead_code)]

use num_complex::Complex64;
use photovqe::linalg::pauli;
use photovqe::{ComplexMatrix, DensityOperator, ParamVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-random SU(2) element from a uniform unit quaternion.
pub fn random_su2<R: Rng>(rng: &mut R) -> ComplexMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| gauss(rng));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|v| v / n);
    ComplexMatrix::mat2(
        Complex64::new(a, b),
        Complex64::new(c, d),
        Complex64::new(-c, d),
        Complex64::new(a, -b),
    )
}

/// Ginibre-distributed density operator of dimension `dim`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            g[(r, c)] = Complex64::new(gauss(rng), gauss(rng));
        }
    }
    let w = &g * &g.dagger();
    let tr = w.trace().re;
    DensityOperator::new(w.scale(Complex64::new(1.0 / tr, 0.0))).unwrap()
}

pub fn random_params<R: Rng>(rng: &mut R) -> ParamVector {
    ParamVector(std::array::from_fn(|_| rng.random_range(-4.0..4.0)))
}

/// Singlet `(|01⟩ − |10⟩)/√2` as a dense vector.
pub fn singlet() -> Vec<Complex64> {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![Complex64::new(0.0, 0.0), s, -s, Complex64::new(0.0, 0.0)]
}

/// `op` acting on site `j` (0-based, leftmost most significant) of an `n`-site chain.
pub fn on_site(op: &ComplexMatrix, j: usize, n: usize) -> ComplexMatrix {
    let id = pauli::identity();
    (0..n).fold(ComplexMatrix::identity(1), |acc, k| {
        acc.kron(if k == j { op } else { &id })
    })
}
