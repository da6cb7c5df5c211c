//! Evaluation metrics for learned embeddings.

mod clustering;
mod procrustes;
mod ranking;

pub use clustering::{kmeans, purity, KMeansResult, KMEANS_RESTARTS};
pub use procrustes::{
    centroid_stats, procrustes_align, procrustes_classic, procrustes_distributional, AlignmentResult, CentroidStats,
};
pub use ranking::{auc_ap, link_prediction_scores, RankingScores};

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmbedding;
use crate::triplet::Triplet;

/// Fraction of triplets the embedding answers wrongly.
///
/// A triplet counts as an error when `y · sgn(E_ij − E_ik) = +1`, and also
/// when `E_ij = E_ik` (an undecided answer is not a correct one).
pub fn triplet_error<F>(triplets: &[Triplet], embeddings: &[GaussianEmbedding], energy: F) -> Result<f64>
where
    F: Fn(&GaussianEmbedding, &GaussianEmbedding) -> Result<f64>,
{
    if triplets.is_empty() {
        return Err(Error::Empty("evaluation triplets"));
    }
    let mut wrong = 0usize;
    for t in triplets {
        t.check_bounds(embeddings.len())?;
        let e_ij = energy(&embeddings[t.i], &embeddings[t.j])?;
        let e_ik = energy(&embeddings[t.i], &embeddings[t.k])?;
        let diff = e_ij - e_ik;
        if diff == 0.0 || (diff > 0.0) == (t.label > 0) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / triplets.len() as f64)
}
