use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::photonics::ParamVector;

/// Number of retained components.
pub const COMPONENTS: usize = 3;

/// Projection of six-angle points onto their top principal axes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcaResult {
    pub mean: [f64; 6],
    /// Unit axes in descending variance order.
    pub axes: [[f64; 6]; COMPONENTS],
    /// Sample variance along each axis.
    pub variances: [f64; COMPONENTS],
    /// Share of the total variance per axis; zero when there is no spread.
    pub explained: [f64; COMPONENTS],
    pub total_variance: f64,
    pub projections: Vec<[f64; COMPONENTS]>,
    pub energies: Vec<f64>,
}

/// Mean-centers the points and projects them onto the three axes of largest
/// sample variance. Each axis is signed so its largest component is positive.
pub fn pca_project(points: &[ParamVector], energies: &[f64]) -> Result<PcaResult> {
    let n = points.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "PCA needs at least 4 points, got {n}"
        )));
    }
    if energies.len() != n {
        return Err(Error::Dimension(format!(
            "{n} points but {} energies",
            energies.len()
        )));
    }
    if points.iter().flat_map(|p| p.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PCA input"));
    }

    let mut mean = [0.0; 6];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p.iter()) {
            *m += v / n as f64;
        }
    }
    let centered: Vec<[f64; 6]> = points
        .iter()
        .map(|p| std::array::from_fn(|i| p[i] - mean[i]))
        .collect();

    let mut cov = ComplexMatrix::zeros(6, 6);
    for c in &centered {
        for i in 0..6 {
            for j in 0..6 {
                cov[(i, j)] += Complex64::new(c[i] * c[j] / (n - 1) as f64, 0.0);
            }
        }
    }
    let (values, vectors) = hermitian_eigen(&cov)?;
    let total_variance: f64 = values.iter().map(|v| v.max(0.0)).sum();

    let mut axes = [[0.0; 6]; COMPONENTS];
    let mut variances = [0.0; COMPONENTS];
    for (k, col) in (0..6).rev().take(COMPONENTS).enumerate() {
        let pivot = (0..6)
            .max_by(|&a, &b| {
                vectors[(a, col)]
                    .norm()
                    .total_cmp(&vectors[(b, col)].norm())
            })
            .expect("six rows");
        // Eigenvectors of a real symmetric matrix are real up to a global phase.
        let phase = vectors[(pivot, col)].conj() / vectors[(pivot, col)].norm();
        axes[k] = std::array::from_fn(|r| (vectors[(r, col)] * phase).re);
        let norm = axes[k].iter().map(|v| v * v).sum::<f64>().sqrt();
        axes[k].iter_mut().for_each(|v| *v /= norm);
        variances[k] = values[col].max(0.0);
    }
    let explained = variances.map(|v| {
        if total_variance > 0.0 {
            v / total_variance
        } else {
            0.0
        }
    });

    let projections = centered
        .iter()
        .map(|c| std::array::from_fn(|k| (0..6).map(|i| axes[k][i] * c[i]).sum()))
        .collect();

    Ok(PcaResult {
        mean,
        axes,
        variances,
        explained,
        total_variance,
        projections,
        energies: energies.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    fn dot(a: &[f64; 6], b: &[f64; 6]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn planar_data_has_two_components() {
        let u = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0].map(|v: f64| v / 2f64.sqrt());
        let w = [0.0, 0.0, 0.6, 0.8, 0.0, 0.0];
        let mut rng = stream_rng(5, 0);
        let pts: Vec<ParamVector> = (0..200)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                ParamVector(std::array::from_fn(|i| 1.0 + 3.0 * a * u[i] + b * w[i]))
            })
            .collect();
        let r = pca_project(&pts, &vec![0.0; 200]).unwrap();
        assert!((r.explained[0] + r.explained[1] - 1.0).abs() < 1e-9);
        assert!(r.variances[2].abs() < 1e-9);
        assert!(dot(&r.axes[0], &u).abs() > 0.99);
    }

    #[test]
    fn axes_are_orthonormal_and_sorted() {
        let mut rng = stream_rng(9, 0);
        let pts: Vec<ParamVector> = (0..500)
            .map(|_| {
                ParamVector(std::array::from_fn(|i| {
                    (i + 1) as f64 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                }))
            })
            .collect();
        let r = pca_project(&pts, &vec![1.0; 500]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&r.axes[i], &r.axes[j]) - want).abs() < 1e-10);
            }
        }
        assert!(r.explained[0] >= r.explained[1] && r.explained[1] >= r.explained[2]);
        assert!(r.explained.iter().all(|e| (0.0..=1.0).contains(e)));
    }

    #[test]
    fn isotropic_cloud_splits_evenly() {
        let mut rng = stream_rng(11, 0);
        let pts: Vec<ParamVector> = (0..20_000)
            .map(|_| ParamVector(std::array::from_fn(|_| StandardNormal.sample(&mut rng))))
            .collect();
        let r = pca_project(&pts, &vec![0.0; 20_000]).unwrap();
        let sum: f64 = r.explained.iter().sum();
        assert!((sum - 0.5).abs() < 0.03, "{sum}");
        for e in r.explained {
            assert!((e - 1.0 / 6.0).abs() < 0.02, "{e}");
        }
    }

    #[test]
    fn pythagoras_residual_matches_discarded_variance() {
        let mut rng = stream_rng(13, 0);
        let pts: Vec<ParamVector> = (0..300)
            .map(|_| {
                ParamVector(std::array::from_fn(|i| {
                    (6 - i) as f64 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                }))
            })
            .collect();
        let r = pca_project(&pts, &vec![0.0; 300]).unwrap();
        let mut residual = 0.0;
        for (p, proj) in pts.iter().zip(&r.projections) {
            let c: [f64; 6] = std::array::from_fn(|i| p[i] - r.mean[i]);
            let recon: [f64; 6] =
                std::array::from_fn(|i| (0..3).map(|k| proj[k] * r.axes[k][i]).sum());
            residual += (0..6).map(|i| (c[i] - recon[i]).powi(2)).sum::<f64>();
        }
        let discarded = (r.total_variance - r.variances.iter().sum::<f64>()) * 299.0;
        assert!(
            (residual - discarded).abs() < 1e-8 * residual.max(1.0),
            "{residual} vs {discarded}"
        );
    }

    #[test]
    fn degenerate_inputs() {
        let p = ParamVector([0.3; 6]);
        assert!(pca_project(&[p; 3], &[0.0; 3]).is_err());
        let r = pca_project(&[p; 5], &[0.0; 5]).unwrap();
        assert_eq!(r.explained, [0.0; 3]);
        assert!(r.projections.iter().flatten().all(|v| *v == 0.0));
        assert!(pca_project(&[p; 5], &[0.0; 4]).is_err());
    }
}
