//! Diagonal Gaussian action distributions and Wasserstein-2 distances.

use nalgebra::DMatrix;

use crate::{DiversityError, Result};

/// Eigenvalues of a user-supplied covariance in `[-PSD_CLAMP_TOL, 0]` are
/// treated as zero; anything more negative is rejected as not PSD.
const PSD_CLAMP_TOL: f64 = 1e-10;

/// Relative tolerance for the symmetry check on covariance inputs.
const SYMMETRY_TOL: f64 = 1e-8;

/// A diagonal Gaussian over a continuous action space: a mean vector plus a
/// strictly positive per-dimension standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl DiagGaussian {
    /// Build a distribution, validating that `mean` and `std` have equal
    /// nonzero length and every `std` entry is strictly positive and finite.
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(DiversityError::DimensionMismatch {
                left: mean.len(),
                right: std.len(),
            });
        }
        if mean.is_empty() {
            return Err(DiversityError::InvalidParameter {
                name: "mean",
                reason: "distribution must have at least one dimension".into(),
            });
        }
        for (index, &value) in std.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(DiversityError::InvalidStd { index, value });
            }
        }
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }
}

/// Wasserstein-2 distance between two diagonal Gaussians:
/// `sqrt(||mu1 - mu2||^2 + ||sigma1 - sigma2||^2)`.
///
/// This is the general Gaussian W2 specialized to commuting (diagonal)
/// covariances, where the Bures term collapses to the Euclidean distance
/// between the standard-deviation vectors. The distance itself (not its
/// square) is returned, making this a true metric.
pub fn w2_diag(p: &DiagGaussian, q: &DiagGaussian) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(DiversityError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(w2_diag_unchecked(p.mean(), p.std(), q.mean(), q.std()))
}

/// Slice-level W2 used on pre-validated snapshot data.
pub(crate) fn w2_diag_unchecked(m1: &[f64], s1: &[f64], m2: &[f64], s2: &[f64]) -> f64 {
    let mut sum = 0.0;
    for ((a, b), (sa, sb)) in m1.iter().zip(m2).zip(s1.iter().zip(s2)) {
        let dm = a - b;
        let ds = sa - sb;
        sum += dm * dm + ds * ds;
    }
    sum.sqrt()
}

/// Wasserstein-2 distance between two full-covariance Gaussians:
/// `sqrt(||mu1 - mu2||^2 + trace(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2}))`.
///
/// Covariances are given row-major with `dim * dim` entries. Matrix square
/// roots go through symmetric eigendecompositions; input eigenvalues in
/// `[-1e-10, 0]` are clamped to zero and anything more negative is an error.
pub fn w2_full(mean1: &[f64], cov1: &[f64], mean2: &[f64], cov2: &[f64]) -> Result<f64> {
    let dim = mean1.len();
    if mean2.len() != dim {
        return Err(DiversityError::DimensionMismatch {
            left: dim,
            right: mean2.len(),
        });
    }
    if dim == 0 {
        return Err(DiversityError::InvalidParameter {
            name: "mean1",
            reason: "distribution must have at least one dimension".into(),
        });
    }
    let sigma1 = validated_covariance(cov1, dim)?;
    let sigma2 = validated_covariance(cov2, dim)?;

    let mean_term: f64 = mean1
        .iter()
        .zip(mean2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();

    let root1 = psd_sqrt(&sigma1)?;
    // S1^{1/2} S2 S1^{1/2} is PSD in exact arithmetic; roundoff can leave
    // slightly negative eigenvalues, which are clamped rather than rejected.
    let inner = &root1 * &sigma2 * &root1;
    let cross_trace = psd_sqrt_trace_lenient(&inner);

    let cov_term = sigma1.trace() + sigma2.trace() - 2.0 * cross_trace;
    Ok((mean_term + cov_term).max(0.0).sqrt())
}

fn validated_covariance(cov: &[f64], dim: usize) -> Result<DMatrix<f64>> {
    if cov.len() != dim * dim {
        return Err(DiversityError::DimensionMismatch {
            left: cov.len(),
            right: dim * dim,
        });
    }
    let max_abs = cov.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = SYMMETRY_TOL * max_abs.max(1.0);
    for row in 0..dim {
        for col in 0..row {
            let delta = (cov[row * dim + col] - cov[col * dim + row]).abs();
            if delta > tol {
                return Err(DiversityError::NotSymmetric { row, col, delta });
            }
        }
    }
    Ok(DMatrix::from_row_slice(dim, dim, cov))
}

/// Symmetric PSD square root; rejects eigenvalues below `-PSD_CLAMP_TOL`.
fn psd_sqrt(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eigen = matrix.clone().symmetric_eigen();
    let mut roots = eigen.eigenvalues.clone();
    for value in roots.iter_mut() {
        if *value < -PSD_CLAMP_TOL {
            return Err(DiversityError::NotPositiveSemidefinite { eigenvalue: *value });
        }
        *value = value.max(0.0).sqrt();
    }
    let q = &eigen.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// Trace of the PSD square root of a matrix that is PSD up to roundoff; all
/// negative eigenvalues are clamped to zero.
fn psd_sqrt_trace_lenient(matrix: &DMatrix<f64>) -> f64 {
    let eigen = matrix.clone().symmetric_eigen();
    eigen
        .eigenvalues
        .iter()
        .map(|&value| value.max(0.0).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gauss(mean: &[f64], std: &[f64]) -> DiagGaussian {
        DiagGaussian::new(mean.to_vec(), std.to_vec()).unwrap()
    }

    #[test]
    fn rejects_nonpositive_std() {
        assert!(DiagGaussian::new(vec![0.0], vec![0.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0], vec![-1.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(DiagGaussian::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let p = gauss(&[0.0], &[1.0]);
        let q = gauss(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(w2_diag(&p, &q).is_err());
    }

    #[test]
    fn w2_diag_identical_is_zero() {
        let p = gauss(&[0.3, -1.2, 4.0], &[0.5, 2.0, 0.1]);
        assert_eq!(w2_diag(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn w2_diag_pure_mean_shift_is_euclidean() {
        let p = gauss(&[0.0, 0.0], &[1.0, 1.0]);
        let q = gauss(&[3.0, 4.0], &[1.0, 1.0]);
        assert_abs_diff_eq!(w2_diag(&p, &q).unwrap(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn w2_diag_pure_std_shift() {
        // Equal means, stds (1,1) vs (2,2): distance sqrt(1^2 + 1^2) = sqrt(2).
        let p = gauss(&[0.0, 0.0], &[1.0, 1.0]);
        let q = gauss(&[0.0, 0.0], &[2.0, 2.0]);
        let d = w2_diag(&p, &q).unwrap();
        assert_abs_diff_eq!(d, 2.0f64.sqrt(), epsilon = 1e-12);
        // And it agrees with the full-covariance route on the same inputs.
        let full = w2_full(
            &[0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0],
            &[4.0, 0.0, 0.0, 4.0],
        )
        .unwrap();
        assert_abs_diff_eq!(d, full, epsilon = 1e-10);
    }

    #[test]
    fn w2_full_identical_is_zero() {
        let cov = [2.0, 0.5, 0.5, 1.0];
        let d = w2_full(&[1.0, -2.0], &cov, &[1.0, -2.0], &cov).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn w2_full_identity_covs_mean_shift() {
        let eye = [1.0, 0.0, 0.0, 1.0];
        let d = w2_full(&[0.0, 0.0], &eye, &[3.0, 4.0], &eye).unwrap();
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-10);
    }

    #[test]
    fn w2_full_rejects_asymmetric() {
        let bad = [1.0, 0.3, 0.0, 1.0];
        let eye = [1.0, 0.0, 0.0, 1.0];
        assert!(matches!(
            w2_full(&[0.0, 0.0], &bad, &[0.0, 0.0], &eye),
            Err(DiversityError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn w2_full_rejects_negative_eigenvalue() {
        // Symmetric but indefinite: eigenvalues 1 and -1.
        let indefinite = [0.0, 1.0, 1.0, 0.0];
        let eye = [1.0, 0.0, 0.0, 1.0];
        assert!(matches!(
            w2_full(&[0.0, 0.0], &indefinite, &[0.0, 0.0], &eye),
            Err(DiversityError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn w2_full_known_noncommuting_case() {
        // 1-D sanity: N(0, 4) vs N(0, 1) -> |2 - 1| = 1.
        let d = w2_full(&[0.0], &[4.0], &[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
    }
}
