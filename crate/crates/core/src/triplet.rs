//! Triplet comparisons: oracles, sampling strategies and label noise.
//!
//! A triplet `⟨i, j, k⟩` asks whether `j` is closer to the anchor `i` than
//! `k` is. The oracle answers `+1` when `δ(i,j) < δ(i,k)` and `−1` when
//! `δ(i,j) > δ(i,k)`; exact ties answer `+1` ("j wins").

use alloc::vec::Vec;

use rand::Rng;

use crate::datasets::PointDataset;
use crate::error::{invalid, Error, Result};
use crate::graph::{HopTable, RelationGraph};
use crate::rng;

/// Share of a sampled budget kept for training; the rest is held out.
pub const TRAIN_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// Oracle answer, `+1` or `−1`.
    pub label: i8,
}

impl Triplet {
    pub fn new(i: usize, j: usize, k: usize, label: i8) -> Result<Self> {
        check_distinct(i, j, k)?;
        if label != 1 && label != -1 {
            return Err(invalid(alloc::format!("triplet label must be +1 or -1, got {label}")));
        }
        Ok(Self { i, j, k, label })
    }

    pub fn flipped(self) -> Self {
        Self {
            label: -self.label,
            ..self
        }
    }

    pub fn max_index(&self) -> usize {
        self.i.max(self.j).max(self.k)
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.max_index() {
            m if m >= n => Err(Error::IndexOutOfRange { index: m, len: n }),
            _ => Ok(()),
        }
    }
}

fn check_distinct(i: usize, j: usize, k: usize) -> Result<()> {
    if i == j || i == k || j == k {
        return Err(Error::DuplicateIndex { i, j, k });
    }
    Ok(())
}

/// Oracle answer from two dissimilarities, ties resolved to `+1`.
#[inline]
pub fn label_from_dissimilarity<T: PartialOrd>(d_ij: T, d_ik: T) -> i8 {
    if d_ij > d_ik {
        -1
    } else {
        1
    }
}

/// Source of ground-truth triplet answers.
pub trait Oracle {
    /// Number of items the oracle knows about.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn answer(&self, i: usize, j: usize, k: usize) -> Result<i8>;
}

/// Oracle backed by squared Euclidean distances between ground-truth points.
#[derive(Debug, Clone, Copy)]
pub struct PointOracle<'a> {
    points: &'a PointDataset,
}

impl<'a> PointOracle<'a> {
    pub fn new(points: &'a PointDataset) -> Self {
        Self { points }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Oracle for PointOracle<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn answer(&self, i: usize, j: usize, k: usize) -> Result<i8> {
        check_distinct(i, j, k)?;
        let n = self.len();
        for idx in [i, j, k] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        let p = |x| self.points.point(x);
        Ok(label_from_dissimilarity(sq_dist(p(i), p(j)), sq_dist(p(i), p(k))))
    }
}

/// Oracle backed by shortest-path hop counts in a relation graph.
#[derive(Debug, Clone)]
pub struct GraphOracle {
    hops: HopTable,
}

impl GraphOracle {
    pub fn new(graph: &RelationGraph) -> Self {
        Self {
            hops: graph.hop_table(),
        }
    }

    pub fn hops(&self) -> &HopTable {
        &self.hops
    }
}

impl Oracle for GraphOracle {
    fn len(&self) -> usize {
        self.hops.len()
    }

    fn answer(&self, i: usize, j: usize, k: usize) -> Result<i8> {
        check_distinct(i, j, k)?;
        Ok(label_from_dissimilarity(self.hops.hop(i, j)?, self.hops.hop(i, k)?))
    }
}

pub fn oracle_from_points(points: &PointDataset, i: usize, j: usize, k: usize) -> Result<i8> {
    PointOracle::new(points).answer(i, j, k)
}

/// Single query against a graph. Runs one BFS; use [`GraphOracle`] for many.
pub fn oracle_from_graph(graph: &RelationGraph, i: usize, j: usize, k: usize) -> Result<i8> {
    check_distinct(i, j, k)?;
    let hops = graph.bfs(i)?;
    let get = |v: usize| {
        hops.get(v)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: v,
                len: graph.node_count(),
            })?
            .ok_or(Error::Unreachable(i, v))
    };
    Ok(label_from_dissimilarity(get(j)?, get(k)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    Uniform,
    GraphHop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    /// Budget multiplier `p` in `p · d² · n · ln n`.
    pub budget_multiplier: f64,
    pub noise_rate: f64,
    pub strategy: SamplingStrategy,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            budget_multiplier: 1.0,
            noise_rate: 0.0,
            strategy: SamplingStrategy::Uniform,
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget_multiplier > 0.0 && self.budget_multiplier.is_finite()) {
            return Err(invalid("budget multiplier must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(invalid("noise rate must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Triplet budget `⌈p · d² · n · ln n⌉`.
pub fn budget_from_rule(n: usize, d: usize, p: f64) -> Result<usize> {
    if n < 3 {
        return Err(invalid("budget rule needs n >= 3"));
    }
    if d == 0 {
        return Err(invalid("budget rule needs d >= 1"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid("budget multiplier must be > 0"));
    }
    let nf = n as f64;
    let d2 = (d * d) as f64;
    Ok(libm::ceil(p * d2 * nf * libm::log(nf)) as usize)
}

/// Uniform triplets (with replacement) labeled by `oracle`.
pub fn sample_uniform<O: Oracle + ?Sized>(n: usize, budget: usize, oracle: &O, seed: u64) -> Result<Vec<Triplet>> {
    if n < 3 {
        return Err(invalid(alloc::format!("uniform sampling needs n >= 3, got {n}")));
    }
    if budget == 0 {
        return Err(invalid("triplet budget must be >= 1"));
    }
    if oracle.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: oracle.len(),
        });
    }
    let mut rng = rng::stream(seed);
    let mut out = Vec::with_capacity(budget);
    for _ in 0..budget {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let mut k = rng.random_range(0..n - 2);
        if k >= lo {
            k += 1;
        }
        if k >= hi {
            k += 1;
        }
        let label = oracle.answer(i, j, k)?;
        out.push(Triplet { i, j, k, label });
    }
    Ok(out)
}

/// Graph-hop triplets: pick an anchor, one node from each hop ring around
/// it, then one (nearer, farther) ring pair. Every triplet is labeled `+1`.
///
/// Anchors whose reachable nodes all sit on one ring are never drawn; the
/// call fails if every node is such an anchor.
pub fn sample_graph_hop(graph: &RelationGraph, budget: usize, seed: u64) -> Result<Vec<Triplet>> {
    sample_graph_hop_with(&GraphOracle::new(graph), budget, seed)
}

pub fn sample_graph_hop_with(oracle: &GraphOracle, budget: usize, seed: u64) -> Result<Vec<Triplet>> {
    let hops = oracle.hops();
    let n = hops.len();
    if n < 3 {
        return Err(invalid("graph-hop sampling needs at least 3 nodes"));
    }
    if budget == 0 {
        return Err(invalid("triplet budget must be >= 1"));
    }
    let rings = hop_rings(hops);
    // Redrawing single-ring anchors until success is the same as drawing
    // uniformly among anchors with at least two rings.
    let anchors: Vec<usize> = (0..n).filter(|&a| rings[a].len() >= 2).collect();
    if anchors.is_empty() {
        return Err(invalid("graph-hop sampling: no node has two distinct hop distances"));
    }
    let mut rng = rng::stream(seed);
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let anchor = anchors[rng.random_range(0..anchors.len())];
        let ring = &rings[anchor];
        let r = ring.len();
        // uniform over the r(r-1)/2 ring pairs (near < far)
        let mut pair = rng.random_range(0..r * (r - 1) / 2);
        let mut near = 0;
        while pair >= r - 1 - near {
            pair -= r - 1 - near;
            near += 1;
        }
        let far = near + 1 + pair;
        let j = ring[near][rng.random_range(0..ring[near].len())];
        let k = ring[far][rng.random_range(0..ring[far].len())];
        out.push(Triplet {
            i: anchor,
            j,
            k,
            label: 1,
        });
    }
    Ok(out)
}

/// Nonempty hop rings around every node, nearest first.
fn hop_rings(hops: &HopTable) -> Vec<Vec<Vec<usize>>> {
    (0..hops.len())
        .map(|s| {
            let row = hops.row(s);
            let max = row.iter().filter(|&&h| h != u32::MAX).copied().max().unwrap_or(0) as usize;
            let mut by_hop = alloc::vec![Vec::new(); max + 1];
            for (t, &h) in row.iter().enumerate() {
                if h != u32::MAX && h > 0 {
                    by_hop[h as usize].push(t);
                }
            }
            by_hop.into_iter().filter(|r| !r.is_empty()).collect()
        })
        .collect()
}

/// Negates each label independently with probability `noise_rate`.
pub fn apply_noise(triplets: &[Triplet], noise_rate: f64, seed: u64) -> Result<Vec<Triplet>> {
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(invalid("noise rate must lie in [0, 1]"));
    }
    let mut rng = rng::stream(seed);
    Ok(triplets
        .iter()
        .map(|&t| if rng.random_bool(noise_rate) { t.flipped() } else { t })
        .collect())
}

/// Splits a sample into its training head and held-out tail.
pub fn split_train_test(triplets: &[Triplet]) -> (Vec<Triplet>, Vec<Triplet>) {
    let m = triplets.len();
    let cut = libm::ceil(m as f64 * TRAIN_FRACTION) as usize;
    let cut = cut.min(m);
    (triplets[..cut].to_vec(), triplets[cut..].to_vec())
}

/// A sampled, split, noise-injected triplet set.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletSample {
    pub train: Vec<Triplet>,
    /// Held-out triplets with noise-free labels.
    pub test: Vec<Triplet>,
}

/// Full sampling pipeline: draw the budget, split 90/10, then flip labels of
/// the training part only. Held-out labels stay noise-free so that error
/// on them measures recovery of the ground truth.
pub fn sample_with_config<O: Oracle + ?Sized>(
    config: &SamplingConfig,
    budget: usize,
    oracle: &O,
    graph: Option<&GraphOracle>,
) -> Result<TripletSample> {
    config.validate()?;
    let draw_seed = rng::derive(config.seed, 1);
    let noise_seed = rng::derive(config.seed, 2);
    let all = match config.strategy {
        SamplingStrategy::Uniform => sample_uniform(oracle.len(), budget, oracle, draw_seed)?,
        SamplingStrategy::GraphHop => {
            let g = graph.ok_or_else(|| invalid("graph-hop sampling requires a relation graph"))?;
            sample_graph_hop_with(g, budget, draw_seed)?
        }
    };
    let (train, test) = split_train_test(&all);
    let train = apply_noise(&train, config.noise_rate, noise_seed)?;
    Ok(TripletSample { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_blobs, gen_hierarchy};
    use crate::graph::NodeKind;
    use alloc::vec;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointDataset {
        PointDataset::new("line", 1, xs.to_vec(), None).unwrap()
    }

    #[test]
    fn point_oracle_examples() {
        assert_eq!(oracle_from_points(&line(&[0.0, 1.0, 3.0]), 0, 1, 2).unwrap(), 1);
        assert_eq!(oracle_from_points(&line(&[0.0, 3.0, 1.0]), 0, 1, 2).unwrap(), -1);
        assert_eq!(oracle_from_points(&line(&[0.0, 2.0, -2.0]), 0, 1, 2).unwrap(), 1);
        assert!(matches!(
            oracle_from_points(&line(&[0.0, 1.0, 2.0]), 0, 0, 2),
            Err(Error::DuplicateIndex { .. })
        ));
    }

    fn path(n: usize) -> RelationGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        RelationGraph::from_edges(vec![NodeKind::Item; n], &edges).unwrap()
    }

    #[test]
    fn graph_oracle_examples() {
        // a-b-c-d
        assert_eq!(oracle_from_graph(&path(4), 0, 1, 3).unwrap(), 1);
        // star: center 0, leaves 1,2,3; tie 2 vs 2
        let star = RelationGraph::from_edges(vec![NodeKind::Item; 4], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(oracle_from_graph(&star, 1, 2, 3).unwrap(), 1);
        // item → its fine class vs another super class
        let g = gen_hierarchy(1, 2, 2).unwrap();
        let item = (0..g.node_count()).find(|&v| g.kind(v) == NodeKind::Item).unwrap();
        let fine = g.neighbors(item)[0];
        let own_super = *g.neighbors(fine).iter().find(|&&v| g.kind(v) == NodeKind::SuperClass).unwrap();
        let other_super = (0..g.node_count())
            .find(|&v| g.kind(v) == NodeKind::SuperClass && v != own_super)
            .unwrap();
        assert_eq!(oracle_from_graph(&g, item, fine, other_super).unwrap(), 1);
        assert_eq!(GraphOracle::new(&g).answer(item, other_super, fine).unwrap(), -1);

        let split = RelationGraph::new(vec![NodeKind::Item; 3]);
        assert_eq!(oracle_from_graph(&split, 0, 1, 2), Err(Error::Unreachable(0, 1)));
    }

    #[test]
    fn budget_rule_arithmetic() {
        assert_eq!(budget_from_rule(1000, 2, 1.0).unwrap(), 27632);
        assert_eq!(budget_from_rule(1000, 2, 4.0).unwrap(), 110525);
        assert_eq!(budget_from_rule(3, 1, 1.0).unwrap(), 4);
        assert_eq!(budget_from_rule(100, 2, 0.5).unwrap(), 922);
        assert_eq!(budget_from_rule(500, 2, 4.0).unwrap(), 49717);
        assert!(budget_from_rule(2, 1, 1.0).is_err());
        assert!(budget_from_rule(10, 1, 0.0).is_err());
    }

    #[test]
    fn uniform_sampling_small_n() {
        let pts = line(&[0.0, 1.0, 5.0]);
        let ts = sample_uniform(3, 5, &PointOracle::new(&pts), 11).unwrap();
        assert_eq!(ts.len(), 5);
        for t in &ts {
            let mut idx = [t.i, t.j, t.k];
            idx.sort_unstable();
            assert_eq!(idx, [0, 1, 2]);
        }
        assert_eq!(ts, sample_uniform(3, 5, &PointOracle::new(&pts), 11).unwrap());
        assert!(sample_uniform(2, 5, &PointOracle::new(&pts), 11).is_err());
    }

    #[test]
    fn uniform_sampling_full_budget() {
        let ds = gen_blobs(1000, 1).unwrap();
        let budget = budget_from_rule(1000, 2, 4.0).unwrap();
        let ts = sample_uniform(1000, budget, &PointOracle::new(&ds), 3).unwrap();
        assert_eq!(ts.len(), budget);
    }

    #[test]
    fn graph_hop_on_short_path() {
        let g = path(3);
        let ts = sample_graph_hop(&g, 20, 5).unwrap();
        assert_eq!(ts.len(), 20);
        for t in &ts {
            // only the endpoints have two rings
            assert!(t.i == 0 || t.i == 2);
            assert_eq!(t.j, 1);
            assert_eq!(t.label, 1);
        }
        assert!(ts.contains(&Triplet::new(0, 1, 2, 1).unwrap()));
    }

    #[test]
    fn graph_hop_respects_hop_order() {
        let g = gen_hierarchy(3, 2, 3).unwrap();
        let table = g.hop_table();
        let ts = sample_graph_hop(&g, 2000, 9).unwrap();
        for t in &ts {
            assert!(table.hop(t.i, t.j).unwrap() < table.hop(t.i, t.k).unwrap());
        }
        assert_eq!(ts, sample_graph_hop(&g, 2000, 9).unwrap());
    }

    #[test]
    fn graph_hop_fails_without_two_rings() {
        // triangle: every node sees one ring
        let g = RelationGraph::from_edges(vec![NodeKind::Item; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(sample_graph_hop(&g, 1, 0).is_err());
    }

    #[test]
    fn noise_extremes_and_rate() {
        let ds = gen_blobs(50, 2).unwrap();
        let ts = sample_uniform(50, 10_000, &PointOracle::new(&ds), 4).unwrap();
        assert_eq!(apply_noise(&ts, 0.0, 1).unwrap(), ts);
        let all = apply_noise(&ts, 1.0, 1).unwrap();
        assert!(all.iter().zip(&ts).all(|(a, b)| a.label == -b.label && (a.i, a.j, a.k) == (b.i, b.j, b.k)));
        let half = apply_noise(&ts, 0.5, 1).unwrap();
        let flipped = half.iter().zip(&ts).filter(|(a, b)| a.label != b.label).count() as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&flipped), "{flipped}");
        assert!(apply_noise(&ts, 1.5, 1).is_err());
    }

    #[test]
    fn split_is_ninety_ten() {
        let ts: Vec<_> = (0..100).map(|x| Triplet { i: x, j: x + 1, k: x + 2, label: 1 }).collect();
        let (train, test) = split_train_test(&ts);
        assert_eq!((train.len(), test.len()), (90, 10));
        assert_eq!(train[0].i, 0);
        assert_eq!(test[0].i, 90);
    }

    #[test]
    fn pipeline_noises_only_training_part() {
        let ds = gen_blobs(60, 2).unwrap();
        let oracle = PointOracle::new(&ds);
        let cfg = SamplingConfig {
            noise_rate: 0.3,
            seed: 5,
            ..SamplingConfig::default()
        };
        let s = sample_with_config(&cfg, 1000, &oracle, None).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (900, 100));
        for t in &s.test {
            assert_eq!(t.label, oracle.answer(t.i, t.j, t.k).unwrap());
        }
        let wrong = s.train.iter().filter(|t| t.label != oracle.answer(t.i, t.j, t.k).unwrap()).count();
        assert!(wrong > 200 && wrong < 340, "{wrong}");
    }

    proptest! {
        #[test]
        fn oracle_antisymmetry_and_consistency(
            xs in proptest::collection::vec(-50.0..50.0f64, 6),
            seed in any::<u64>(),
        ) {
            let pts = PointDataset::new("p", 2, xs, None).unwrap();
            let oracle = PointOracle::new(&pts);
            for t in sample_uniform(3, 30, &oracle, seed).unwrap() {
                let d_ij = sq_dist(pts.point(t.i), pts.point(t.j));
                let d_ik = sq_dist(pts.point(t.i), pts.point(t.k));
                if d_ij != d_ik {
                    prop_assert_eq!(oracle.answer(t.i, t.k, t.j).unwrap(), -t.label);
                    let sgn = if d_ij > d_ik { 1 } else { -1 };
                    prop_assert_eq!(t.label * sgn, -1);
                }
            }
        }
    }
}
