//! Gaussian embeddings and closed-form distances between them.
//!
//! For `x = N(a, A)` and `y = N(b, B)` the squared 2-Wasserstein distance is
//!
//! ```text
//! W2²(x, y) = ‖a − b‖² + Tr(A + B − 2 (A^½ B A^½)^½)
//! ```
//!
//! and when both covariances are diagonal the Bures term collapses to the
//! squared Hellinger distance of the diagonals, `‖√d_A − √d_B‖²`. Learning
//! only uses the diagonal form; [`bures_sq`] is the general matrix version,
//! kept for evaluation and cross-checking.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// One item embedded as `N(mu, diag(sigma))`; `sigma` holds variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEmbedding {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl GaussianEmbedding {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Empty("embedding dimension"));
        }
        if mu.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                actual: sigma.len(),
            });
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mu"));
        }
        for (index, &value) in sigma.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("sigma"));
            }
            if value < 0.0 {
                return Err(Error::NegativeVariance { index, value });
            }
        }
        Ok(Self { mu, sigma })
    }

    /// A point mass at `mu`.
    pub fn dirac(mu: Vec<f64>) -> Result<Self> {
        let sigma = alloc::vec![0.0; mu.len()];
        Self::new(mu, sigma)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Trace of the covariance.
    pub fn trace(&self) -> f64 {
        self.sigma.iter().sum()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.mu, self.sigma)
    }
}

/// Dense symmetric positive semi-definite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    /// Builds a covariance from row-major entries, checking symmetry and PSD.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("covariance dimension"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance"));
        }
        let m = DMatrix::from_row_slice(dim, dim, entries);
        let mut asym = 0.0_f64;
        for r in 0..dim {
            for c in (r + 1)..dim {
                asym = asym.max((m[(r, c)] - m[(c, r)]).abs());
            }
        }
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let min_eig = SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { m })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut entries = alloc::vec![0.0; d * d];
        for (k, &v) in diag.iter().enumerate() {
            entries[k * d + k] = v;
        }
        Self::from_row_major(d, &entries)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.m[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }
}

/// PSD square root via eigendecomposition, negative eigenvalues clipped to 0.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|l| libm::sqrt(l.max(0.0)));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&roots) * q.transpose()
}

/// Squared Bures metric `Tr(A + B − 2 (A^½ B A^½)^½)`.
pub fn bures_sq(a: &CovMatrix, b: &CovMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let ra = psd_sqrt(&a.m);
    let mut cross = &ra * &b.m * &ra;
    // symmetrize away round-off before the second eigendecomposition
    cross = (&cross + cross.transpose()) * 0.5;
    let cross_root_trace: f64 = SymmetricEigen::new(cross)
        .eigenvalues
        .iter()
        .map(|&l| libm::sqrt(l.max(0.0)))
        .sum();
    Ok((a.trace() + b.trace() - 2.0 * cross_root_trace).max(0.0))
}

/// Squared Hellinger distance between variance diagonals, `‖√a − √b‖²`.
pub fn hellinger_sq(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    for (index, &value) in a.iter().chain(b.iter()).enumerate() {
        if value.is_nan() {
            return Err(Error::NonFinite("variance"));
        }
        if value < 0.0 {
            return Err(Error::NegativeVariance {
                index: index % a.len().max(1),
                value,
            });
        }
    }
    Ok(hellinger_sq_unchecked(a, b))
}

#[inline]
fn hellinger_sq_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = libm::sqrt(x) - libm::sqrt(y);
            d * d
        })
        .sum()
}

#[inline]
fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn check_same_dim(x: &GaussianEmbedding, y: &GaussianEmbedding) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(())
}

/// Squared 2-Wasserstein distance between two diagonal Gaussians.
///
/// Both terms are sums of per-coordinate squares, so the result is exactly
/// symmetric in its arguments.
pub fn wasserstein2_sq(x: &GaussianEmbedding, y: &GaussianEmbedding) -> Result<f64> {
    check_same_dim(x, y)?;
    Ok(wasserstein2_sq_raw(x.mu(), x.sigma(), y.mu(), y.sigma()))
}

/// Unchecked kernel over raw slices; callers guarantee equal lengths and
/// nonnegative variances.
#[inline]
pub(crate) fn wasserstein2_sq_raw(mu_x: &[f64], sig_x: &[f64], mu_y: &[f64], sig_y: &[f64]) -> f64 {
    sq_euclidean(mu_x, mu_y) + hellinger_sq_unchecked(sig_x, sig_y)
}

/// Gradient of [`wasserstein2_sq`] with respect to all four parameter vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct W2Grad {
    pub mu_x: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub sigma_y: Vec<f64>,
}

/// Analytic gradient of the squared Wasserstein distance.
///
/// `∂/∂μx = 2(μx − μy)` and `∂/∂σx[k] = (√σx[k] − √σy[k]) / √σx[k]`, with the
/// mirrored expressions for `y`. The variance derivative blows up at zero, so
/// zero variances are rejected.
pub fn wasserstein2_sq_grad(x: &GaussianEmbedding, y: &GaussianEmbedding) -> Result<W2Grad> {
    check_same_dim(x, y)?;
    for (k, (&sx, &sy)) in x.sigma().iter().zip(y.sigma()).enumerate() {
        if sx == 0.0 || sy == 0.0 {
            return Err(Error::ZeroVariance(k));
        }
    }
    let d = x.dim();
    let mut g = W2Grad {
        mu_x: alloc::vec![0.0; d],
        sigma_x: alloc::vec![0.0; d],
        mu_y: alloc::vec![0.0; d],
        sigma_y: alloc::vec![0.0; d],
    };
    for k in 0..d {
        let dm = 2.0 * (x.mu[k] - y.mu[k]);
        g.mu_x[k] = dm;
        g.mu_y[k] = -dm;
        let (rx, ry) = (libm::sqrt(x.sigma[k]), libm::sqrt(y.sigma[k]));
        g.sigma_x[k] = (rx - ry) / rx;
        g.sigma_y[k] = (ry - rx) / ry;
    }
    Ok(g)
}

/// Accumulates `scale · ∂W2²/∂(x, y)` into caller buffers. Raw-slice variant
/// used in the training loop, where variances are known to be positive.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn accumulate_w2_grad(
    scale: f64,
    mu_x: &[f64],
    sig_x: &[f64],
    mu_y: &[f64],
    sig_y: &[f64],
    g_mu_x: &mut [f64],
    g_sig_x: &mut [f64],
    g_mu_y: &mut [f64],
    g_sig_y: &mut [f64],
) {
    for k in 0..mu_x.len() {
        let dm = 2.0 * scale * (mu_x[k] - mu_y[k]);
        g_mu_x[k] += dm;
        g_mu_y[k] -= dm;
        let (rx, ry) = (libm::sqrt(sig_x[k]), libm::sqrt(sig_y[k]));
        g_sig_x[k] += scale * (rx - ry) / rx;
        g_sig_y[k] += scale * (ry - rx) / ry;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn g(mu: &[f64], sigma: &[f64]) -> GaussianEmbedding {
        GaussianEmbedding::new(mu.to_vec(), sigma.to_vec()).unwrap()
    }

    #[test]
    fn dirac_pair_is_squared_euclidean() {
        let w = wasserstein2_sq(&g(&[1.0, 2.0], &[0.0, 0.0]), &g(&[4.0, 6.0], &[0.0, 0.0])).unwrap();
        assert_eq!(w, 25.0);
    }

    #[test]
    fn identical_embeddings_have_zero_distance() {
        let x = g(&[0.3, -1.2], &[0.7, 2.5]);
        assert_eq!(wasserstein2_sq(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn variance_only_difference() {
        let w = wasserstein2_sq(&g(&[0.0, 0.0], &[1.0, 1.0]), &g(&[0.0, 0.0], &[4.0, 4.0])).unwrap();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_dims_and_nan() {
        let x = g(&[0.0], &[1.0]);
        let y = g(&[0.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(wasserstein2_sq(&x, &y), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            GaussianEmbedding::new(vec![f64::NAN], vec![1.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            GaussianEmbedding::new(vec![0.0], vec![-1.0]),
            Err(Error::NegativeVariance { .. })
        ));
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger_sq(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((hellinger_sq(&[1.0, 4.0], &[4.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((hellinger_sq(&[1.0], &[9.0]).unwrap() - 4.0).abs() < 1e-15);
        assert!(matches!(
            hellinger_sq(&[1.0, -0.5], &[1.0, 1.0]),
            Err(Error::NegativeVariance { index: 1, .. })
        ));
    }

    #[test]
    fn bures_examples() {
        let a = CovMatrix::from_row_major(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(bures_sq(&a, &a).unwrap().abs() < 1e-12);

        let a = CovMatrix::diagonal(&[1.0, 1.0]).unwrap();
        let b = CovMatrix::diagonal(&[4.0, 4.0]).unwrap();
        assert!((bures_sq(&a, &b).unwrap() - 2.0).abs() < 1e-12);

        // one-dimensional formula per coordinate: (√9 − √1)² + 0
        let a = CovMatrix::diagonal(&[9.0, 0.0]).unwrap();
        let b = CovMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let brute: f64 = [(9.0_f64, 1.0_f64), (0.0, 0.0)]
            .iter()
            .map(|(x, y)| (libm::sqrt(*x) - libm::sqrt(*y)).powi(2))
            .sum();
        assert!((bures_sq(&a, &b).unwrap() - brute).abs() < 1e-12);
        assert!((brute - 4.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_validation() {
        assert!(matches!(
            CovMatrix::from_row_major(2, &[1.0, 0.5, 0.4, 1.0]),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            CovMatrix::from_row_major(2, &[1.0, 2.0, 2.0, 1.0]),
            Err(Error::NotPsd(_))
        ));
        assert!(CovMatrix::from_row_major(2, &[1.0, 1.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn gradient_examples() {
        let x = g(&[0.5, -0.5], &[2.0, 3.0]);
        let z = wasserstein2_sq_grad(&x, &x).unwrap();
        assert!(z.mu_x.iter().chain(&z.sigma_x).chain(&z.mu_y).chain(&z.sigma_y).all(|&v| v == 0.0));

        let gr = wasserstein2_sq_grad(&g(&[1.0], &[1.0]), &g(&[0.0], &[1.0])).unwrap();
        assert_eq!(gr.mu_x, vec![2.0]);
        assert_eq!(gr.mu_y, vec![-2.0]);

        let gr = wasserstein2_sq_grad(&g(&[0.0], &[1.0]), &g(&[0.0], &[4.0])).unwrap();
        assert!((gr.sigma_x[0] + 1.0).abs() < 1e-15);

        assert!(matches!(
            wasserstein2_sq_grad(&g(&[0.0], &[0.0]), &g(&[0.0], &[1.0])),
            Err(Error::ZeroVariance(0))
        ));
    }

    #[test]
    fn variance_gradient_matches_central_difference() {
        let h = 1e-6;
        let f = |s: f64| hellinger_sq(&[s], &[4.0]).unwrap();
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert!((fd - (-1.0)).abs() < 1e-5);
    }

    fn embedding(d: usize) -> impl Strategy<Value = GaussianEmbedding> {
        (
            proptest::collection::vec(-10.0..10.0f64, d),
            proptest::collection::vec(0.0..10.0f64, d),
        )
            .prop_map(|(m, s)| GaussianEmbedding::new(m, s).unwrap())
    }

    proptest! {
        #[test]
        fn w2_is_symmetric((x, y) in (1usize..5).prop_flat_map(|d| (embedding(d), embedding(d)))) {
            prop_assert_eq!(wasserstein2_sq(&x, &y).unwrap(), wasserstein2_sq(&y, &x).unwrap());
        }

        #[test]
        fn bures_matches_hellinger_on_diagonals(
            (a, b) in (1usize..6).prop_flat_map(|d| (
                proptest::collection::vec(0.0..10.0f64, d),
                proptest::collection::vec(0.0..10.0f64, d),
            ))
        ) {
            let bures = bures_sq(&CovMatrix::diagonal(&a).unwrap(), &CovMatrix::diagonal(&b).unwrap()).unwrap();
            prop_assert!((bures - hellinger_sq(&a, &b).unwrap()).abs() < 1e-8);
        }
    }
}
