//! Procrustes distances between a reference point set and an embedding.
//!
//! Both sets are centred and divided by their centroid size
//! `S = (1/n Σ ‖x̄ − x_i‖²)^½`, then the orthogonal map `R` (rotations and
//! reflections) minimising `Σ ‖R x_i − y_i‖²` is found from the SVD of the
//! cross-covariance. The distributional variant adds the covariance mass
//! `Σ Tr(Σ_i) / S²`, which is independent of `R`, so the alignment itself
//! is the classic one against the locations.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmbedding;

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidStats {
    pub centroid: Vec<f64>,
    /// Centroid size, strictly positive.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// Orthogonal `d × d` matrix, row-major; may include a reflection.
    pub rotation: Vec<f64>,
    pub distance: f64,
}

fn dim_of<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let d = points.first().ok_or(Error::Empty("point set"))?.as_ref().len();
    if d == 0 {
        return Err(Error::Empty("point dimension"));
    }
    for p in points {
        if p.as_ref().len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.as_ref().len(),
            });
        }
        if p.as_ref().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point set"));
        }
    }
    Ok(d)
}

/// Centroid and centroid size; rejects sets whose points all coincide.
pub fn centroid_stats<P: AsRef<[f64]>>(points: &[P]) -> Result<CentroidStats> {
    let d = dim_of(points)?;
    let n = points.len() as f64;
    let mut centroid = alloc::vec![0.0; d];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(p.as_ref()) {
            *c += v;
        }
    }
    for c in &mut centroid {
        *c /= n;
    }
    let ss: f64 = points
        .iter()
        .map(|p| p.as_ref().iter().zip(&centroid).map(|(v, c)| (v - c) * (v - c)).sum::<f64>())
        .sum();
    let size = libm::sqrt(ss / n);
    if !(size > 0.0) {
        return Err(Error::Degenerate);
    }
    Ok(CentroidStats { centroid, size })
}

fn normalized<P: AsRef<[f64]>>(points: &[P], stats: &CentroidStats) -> DMatrix<f64> {
    let d = stats.centroid.len();
    DMatrix::from_fn(points.len(), d, |r, c| (points[r].as_ref()[c] - stats.centroid[c]) / stats.size)
}

/// Optimal orthogonal alignment of `x` onto `y` after normalization.
pub fn procrustes_align<A: AsRef<[f64]>, B: AsRef<[f64]>>(x: &[A], y: &[B]) -> Result<AlignmentResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("Procrustes needs at least 2 points".into()));
    }
    let d = dim_of(x)?;
    let dy = dim_of(y)?;
    if d != dy {
        return Err(Error::DimensionMismatch { expected: d, actual: dy });
    }
    let a = normalized(x, &centroid_stats(x)?);
    let b = normalized(y, &centroid_stats(y)?);

    // maximise Tr(R AᵀB): with AᵀB = U S Vᵀ the optimum is R = V Uᵀ
    let svd = (a.transpose() * &b).svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NonFinite("Procrustes SVD")),
    };
    let r = v_t.transpose() * u.transpose();

    let residual = &a * r.transpose() - &b;
    let distance = libm::sqrt(residual.norm_squared());
    let mut rotation = Vec::with_capacity(d * d);
    for row in 0..d {
        for col in 0..d {
            rotation.push(r[(row, col)]);
        }
    }
    Ok(AlignmentResult { rotation, distance })
}

/// Classic Procrustes distance `inf_R (Σ ‖R x_i/S_X − y_i/S_Y‖²)^½`.
pub fn procrustes_classic<A: AsRef<[f64]>, B: AsRef<[f64]>>(x: &[A], y: &[B]) -> Result<f64> {
    Ok(procrustes_align(x, y)?.distance)
}

/// Procrustes distance between points and Gaussians:
/// `inf_R (Σ ‖R x_i/S_X − μ_i/S_μ‖² + Tr(Σ_i)/S_μ²)^½`, with `S_μ` the
/// centroid size of the locations.
pub fn procrustes_distributional<A: AsRef<[f64]>>(x: &[A], embeddings: &[GaussianEmbedding]) -> Result<f64> {
    let mus: Vec<&[f64]> = embeddings.iter().map(GaussianEmbedding::mu).collect();
    let aligned = procrustes_align(x, &mus)?;
    let size = centroid_stats(&mus)?.size;
    let trace: f64 = embeddings.iter().map(GaussianEmbedding::trace).sum();
    let total = aligned.distance * aligned.distance + trace / (size * size);
    Ok(libm::sqrt(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tri() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        assert!(procrustes_classic(&tri(), &tri()).unwrap() < 1e-12);
    }

    #[test]
    fn similarity_transform_invariance() {
        let (c, s) = (libm::cos(0.7), libm::sin(0.7));
        let y: Vec<Vec<f64>> = tri()
            .iter()
            .map(|p| {
                // reflect, rotate, scale by 3, translate
                let (px, py) = (p[0], -p[1]);
                vec![3.0 * (c * px - s * py) + 5.0, 3.0 * (s * px + c * py) - 2.0]
            })
            .collect();
        let res = procrustes_align(&tri(), &y).unwrap();
        assert!(res.distance < 1e-8);
        let r = &res.rotation;
        let rtr = [
            r[0] * r[0] + r[2] * r[2],
            r[0] * r[1] + r[2] * r[3],
            r[1] * r[1] + r[3] * r[3],
        ];
        assert!((rtr[0] - 1.0).abs() < 1e-8 && rtr[1].abs() < 1e-8 && (rtr[2] - 1.0).abs() < 1e-8);
        assert!(((r[0] * r[3] - r[1] * r[2]).abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_and_mismatched_inputs() {
        let same = vec![vec![1.0, 1.0]; 3];
        assert_eq!(procrustes_classic(&same, &tri()), Err(Error::Degenerate));
        assert!(procrustes_classic(&tri(), &tri()[..2]).is_err());
        assert!(procrustes_classic(&tri(), &[vec![0.0], vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn dirac_reduction_and_trace_term() {
        let y = vec![vec![0.1, 0.2], vec![1.3, -0.1], vec![0.2, 0.9], vec![0.5, 0.5]];
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.4, 0.6]];
        let diracs: Vec<_> = y.iter().map(|m| GaussianEmbedding::dirac(m.clone()).unwrap()).collect();
        let classic = procrustes_classic(&x, &y).unwrap();
        assert!((procrustes_distributional(&x, &diracs).unwrap() - classic).abs() < 1e-12);

        let eps = 0.01;
        let gauss: Vec<_> = x.iter().map(|m| GaussianEmbedding::new(m.clone(), vec![eps, eps]).unwrap()).collect();
        let s = centroid_stats(&x).unwrap().size;
        let want = libm::sqrt(x.len() as f64 * 2.0 * eps / (s * s));
        assert!((procrustes_distributional(&x, &gauss).unwrap() - want).abs() < 1e-10);

        let wider: Vec<_> = x.iter().map(|m| GaussianEmbedding::new(m.clone(), vec![0.02, 0.02]).unwrap()).collect();
        assert!(procrustes_distributional(&x, &wider).unwrap() > procrustes_distributional(&x, &gauss).unwrap());
    }
}
