//! Gaussian laws: the exactly tractable class used by the moment flows and
//! the closed-form transport distances.

use crate::error::{KinError, Result};
use crate::rng::NoiseStream;
use crate::transport::EmpiricalCloud;
use nalgebra::{DMatrix, DVector};

const SYM_TOL: f64 = 1e-12;
const EIG_TOL: f64 = -1e-10;

/// Mean vector and symmetric positive-semidefinite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianLaw {
    /// Builds a law, checking symmetry (to 1e-12, then symmetrized) and
    /// positive semidefiniteness (eigenvalues >= -1e-10, clamped to 0).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let k = mean.len();
        if cov.nrows() != k || cov.ncols() != k {
            return Err(KinError::Dimension(format!(
                "covariance is {}x{} but mean has length {k}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = cov.amax().max(1.0);
        for i in 0..k {
            for j in (i + 1)..k {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYM_TOL * scale {
                    return Err(KinError::Numerical(format!(
                        "covariance not symmetric at ({i},{j}): {} vs {}",
                        cov[(i, j)],
                        cov[(j, i)]
                    )));
                }
            }
        }
        let sym = 0.5 * (&cov + cov.transpose());
        let eig = sym.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l < EIG_TOL * scale) {
            return Err(KinError::Numerical(format!(
                "covariance not positive semidefinite (min eigenvalue {})",
                eig.eigenvalues.min()
            )));
        }
        Ok(GaussianLaw { mean, cov: sym })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard d-dimensional centered law with scalar variance.
    pub fn isotropic(d: usize, variance: f64) -> Self {
        GaussianLaw {
            mean: DVector::zeros(d),
            cov: DMatrix::identity(d, d) * variance,
        }
    }

    pub fn diagonal(mean: Vec<f64>, variances: Vec<f64>) -> Self {
        let k = mean.len();
        assert_eq!(variances.len(), k);
        GaussianLaw {
            mean: DVector::from_vec(mean),
            cov: DMatrix::from_diagonal(&DVector::from_vec(variances)),
        }
    }

    /// Symmetric PSD square root via eigendecomposition (negative roundoff
    /// eigenvalues clamped to zero).
    pub fn cov_sqrt(&self) -> DMatrix<f64> {
        psd_sqrt(&self.cov)
    }

    /// N-fold product law, block-diagonal assembly.
    pub fn tensor_power(&self, n: usize) -> GaussianLaw {
        let k = self.dim();
        let mut mean = DVector::zeros(k * n);
        let mut cov = DMatrix::zeros(k * n, k * n);
        for b in 0..n {
            for i in 0..k {
                mean[b * k + i] = self.mean[i];
                for j in 0..k {
                    cov[(b * k + i, b * k + j)] = self.cov[(i, j)];
                }
            }
        }
        GaussianLaw { mean, cov }
    }

    /// Density at a point (requires nonsingular covariance).
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let k = self.dim();
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| KinError::Numerical("singular covariance in density".into()))?;
        let diff = DVector::from_row_slice(x) - &self.mean;
        let sol = chol.solve(&diff);
        let quad = diff.dot(&sol);
        let logdet: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
        Ok((-0.5 * quad - 0.5 * (k as f64) * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet).exp())
    }

    /// Draws `n` samples as an empirical cloud, using the counter-based
    /// stream (deterministic in the addresses).
    pub fn sample_cloud(&self, n: usize, noise: &NoiseStream, stream_id: u64) -> EmpiricalCloud {
        let k = self.dim();
        let root = self.cov_sqrt();
        let mut points = vec![0.0; n * k];
        let mut z = DVector::zeros(k);
        for i in 0..n {
            for c in 0..k {
                z[c] = noise.standard_normal(stream_id, 0, i as u64, c as u64);
            }
            let p = &self.mean + &root * &z;
            points[i * k..(i + 1) * k].copy_from_slice(p.as_slice());
        }
        EmpiricalCloud::new(n, k, points).expect("finite samples")
    }
}

/// Symmetric PSD square root of a symmetric matrix.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}
