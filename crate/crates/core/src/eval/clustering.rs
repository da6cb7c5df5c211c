//! k-means (Lloyd with k-means++ seeding) and cluster purity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng;

pub const KMEANS_RESTARTS: usize = 10;
const MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.iter().enumerate() {
        let d = sq_dist(p, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds<P: AsRef<[f64]>, R: Rng>(points: &[P], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].as_ref().to_vec());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p.as_ref(), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (idx, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = idx;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].as_ref().to_vec();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p.as_ref(), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd<P: AsRef<[f64]>>(points: &[P], mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let (n, k, d) = (points.len(), centroids.len(), centroids[0].len());
    let mut assignment = alloc::vec![usize::MAX; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (a, p) in assignment.iter_mut().zip(points) {
            let (c, _) = nearest(p.as_ref(), &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = alloc::vec![alloc::vec![0.0; d]; k];
        let mut counts = alloc::vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p.as_ref()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // empty cluster: move it to the point farthest from its centre
                let far = (0..n)
                    .max_by(|&x, &y| {
                        let dx = sq_dist(points[x].as_ref(), &centroids[assignment[x]]);
                        let dy = sq_dist(points[y].as_ref(), &centroids[assignment[y]]);
                        dx.total_cmp(&dy)
                    })
                    .unwrap_or(0);
                centroids[c] = points[far].as_ref().to_vec();
                assignment[far] = c;
            }
        }
    }
    let inertia = assignment
        .iter()
        .zip(points)
        .map(|(&a, p)| sq_dist(p.as_ref(), &centroids[a]))
        .sum();
    KMeansResult {
        assignment,
        centroids,
        inertia,
    }
}

/// Best of [`KMEANS_RESTARTS`] k-means++ / Lloyd runs by inertia; ties keep
/// the earlier restart.
pub fn kmeans<P: AsRef<[f64]>>(points: &[P], k: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if k > n {
        return Err(invalid(alloc::format!("k = {k} exceeds the {n} points")));
    }
    let d = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != d) {
        return Err(invalid("k-means points have ragged dimensions"));
    }
    if points.iter().any(|p| p.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("k-means input"));
    }
    let mut best: Option<KMeansResult> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = rng::stream(rng::derive(seed, restart as u64));
        let run = lloyd(points, plus_plus_seeds(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.ok_or(Error::Empty("k-means restarts"))
}

/// `n⁻¹ Σ_k max_j |w_k ∩ c_j|`.
pub fn purity(clusters: &[usize], classes: &[usize]) -> Result<f64> {
    if clusters.len() != classes.len() {
        return Err(Error::DimensionMismatch {
            expected: clusters.len(),
            actual: classes.len(),
        });
    }
    if clusters.is_empty() {
        return Err(Error::Empty("cluster assignment"));
    }
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&w, &c) in clusters.iter().zip(classes) {
        *table.entry(w).or_default().entry(c).or_default() += 1;
    }
    let majority: usize = table.values().map(|row| row.values().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / clusters.len() as f64)
}
