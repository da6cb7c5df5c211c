//! AUC and average precision for link prediction.
//!
//! Scores are similarities: higher means "more likely an edge". For
//! embeddings the score of a pair is `−E_ij`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmbedding;
use crate::trainer::energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingScores {
    pub auc: f64,
    pub ap: f64,
}

/// AUC from the Mann-Whitney rank statistic (ties count ½) and AP as the
/// precision-weighted recall increments over distinct score thresholds.
pub fn auc_ap(positive: &[f64], negative: &[f64]) -> Result<RankingScores> {
    if positive.is_empty() {
        return Err(Error::Empty("positive scores"));
    }
    if negative.is_empty() {
        return Err(Error::Empty("negative scores"));
    }
    if positive.iter().chain(negative).any(|s| s.is_nan()) {
        return Err(Error::NonFinite("ranking scores"));
    }
    let mut all: Vec<(f64, bool)> = positive
        .iter()
        .map(|&s| (s, true))
        .chain(negative.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // twice the sum of positive midranks, kept integral
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start;
        while end < all.len() && all[end].0 == all[start].0 {
            end += 1;
        }
        // 1-based ranks start+1 ..= end, midrank = (start + 1 + end) / 2
        let twice_mid = (start + 1 + end) as u128;
        let pos_in_group = all[start..end].iter().filter(|e| e.1).count() as u128;
        twice_rank_sum += twice_mid * pos_in_group;
        start = end;
    }
    let (p, q) = (positive.len() as u128, negative.len() as u128);
    let twice_u = twice_rank_sum - p * (p + 1);
    let auc = twice_u as f64 / (2 * p * q) as f64;

    let mut ap = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut end = all.len();
    while end > 0 {
        let mut start = end;
        while start > 0 && all[start - 1].0 == all[end - 1].0 {
            start -= 1;
        }
        let new_tp = all[start..end].iter().filter(|e| e.1).count();
        tp += new_tp;
        fp += end - start - new_tp;
        if new_tp > 0 {
            ap += (new_tp as f64 / positive.len() as f64) * (tp as f64 / (tp + fp) as f64);
        }
        end = start;
    }
    Ok(RankingScores { auc, ap })
}

/// Scores positive and negative item pairs by negated energy.
pub fn link_prediction_scores(
    positive: &[(usize, usize)],
    negative: &[(usize, usize)],
    embeddings: &[GaussianEmbedding],
) -> Result<RankingScores> {
    let score = |&(u, v): &(usize, usize)| -> Result<f64> {
        for idx in [u, v] {
            if idx >= embeddings.len() {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    len: embeddings.len(),
                });
            }
        }
        Ok(-energy(&embeddings[u], &embeddings[v])?)
    };
    let pos = positive.iter().map(score).collect::<Result<Vec<_>>>()?;
    let neg = negative.iter().map(score).collect::<Result<Vec<_>>>()?;
    auc_ap(&pos, &neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn perfect_separation() {
        let r = auc_ap(&[0.9, 0.8], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.ap, 1.0);
    }

    #[test]
    fn all_ties_give_half() {
        let r = auc_ap(&[1.0; 3], &[1.0; 4]).unwrap();
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn average_precision_hand_example() {
        // ranked: pos, neg, pos, neg
        let r = auc_ap(&[4.0, 2.0], &[3.0, 1.0]).unwrap();
        assert!((r.ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(r.auc, 0.75);
    }

    #[test]
    fn empty_classes_rejected() {
        assert!(auc_ap(&[], &[1.0]).is_err());
        assert!(auc_ap(&[1.0], &[]).is_err());
    }

    #[test]
    fn negated_energy_ranks_close_pairs_first() {
        let embs: Vec<_> = [0.0, 0.5, 5.0, 9.0]
            .iter()
            .map(|&x| GaussianEmbedding::dirac(vec![x]).unwrap())
            .collect();
        let r = link_prediction_scores(&[(0, 1)], &[(0, 2), (1, 3)], &embs).unwrap();
        assert_eq!(r.auc, 1.0);
        assert!(link_prediction_scores(&[(0, 7)], &[(0, 2)], &embs).is_err());
    }
}
