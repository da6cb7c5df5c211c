//! Synthetic ground-truth data: 2-D point clouds and relation graphs.
//!
//! Geometric constants:
//!
//! * blobs: three isotropic Gaussians with standard deviation `1/√2`, centred
//!   on an equilateral triangle of side 6: `(0,0)`, `(6,0)`, `(3, 3√3)`.
//! * moons: upper unit half-circle `(cos t, sin t)` for label 0 and the
//!   lower half-circle `(1 − cos t, 0.5 − sin t)` for label 1, `t` evenly
//!   spaced on `[0, π]` inclusive; label 0 gets `⌊n/2⌋` points.
//! * circles: unit circle (label 0, `⌊n/2⌋` points) and a circle of radius
//!   `factor` (label 1), angles evenly spaced on `[0, 2π)`.
//!
//! Jitter is i.i.d. Gaussian per coordinate. Points are emitted in label
//! blocks, not shuffled.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::graph::{NodeKind, RelationGraph};
use crate::rng;

pub const BLOB_STD: f64 = core::f64::consts::FRAC_1_SQRT_2;
pub const BLOB_SIDE: f64 = 6.0;
pub const DEFAULT_MOON_NOISE: f64 = 0.05;
pub const DEFAULT_CIRCLE_FACTOR: f64 = 0.5;
pub const DEFAULT_CIRCLE_NOISE: f64 = 0.05;

/// `n` points in `R^dim`, row-major, with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDataset {
    name: String,
    dim: usize,
    points: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl PointDataset {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        points: Vec<f64>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("point dimension"));
        }
        if points.len() % dim != 0 {
            return Err(invalid("point buffer length is not a multiple of the dimension"));
        }
        let n = points.len() / dim;
        if n < 3 {
            return Err(invalid(alloc::format!("need at least 3 points, got {n}")));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("points"));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: l.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            points,
            labels,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>], labels: Option<Vec<usize>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(invalid(alloc::format!("row {bad} has {} columns, expected {dim}", rows[bad].len())));
        }
        Self::new(name, dim, rows.concat(), labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct labels, 0 when unlabeled.
    pub fn class_count(&self) -> usize {
        self.labels
            .as_ref()
            .map_or(0, |l| l.iter().copied().max().map_or(0, |m| m + 1))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid(alloc::format!("need at least 3 points, got {n}")));
    }
    Ok(())
}

fn jitter(noise_sd: f64) -> Result<Option<Normal<f64>>> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(invalid("noise standard deviation must be finite and >= 0"));
    }
    if noise_sd == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, noise_sd)
        .map(Some)
        .map_err(|_| invalid("bad noise standard deviation"))
}

pub fn blob_centers() -> [[f64; 2]; 3] {
    [
        [0.0, 0.0],
        [BLOB_SIDE, 0.0],
        [BLOB_SIDE / 2.0, BLOB_SIDE * libm::sqrt(3.0) / 2.0],
    ]
}

/// Three-component Gaussian mixture; component sizes differ by at most one.
pub fn gen_blobs(n: usize, seed: u64) -> Result<PointDataset> {
    check_n(n)?;
    let mut rng = rng::stream(seed);
    let centers = blob_centers();
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        let count = n / 3 + usize::from(c < n % 3);
        for _ in 0..count {
            for &m in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                points.push(m + BLOB_STD * z);
            }
            labels.push(c);
        }
    }
    PointDataset::new("blobs", 2, points, Some(labels))
}

fn linspace(start: f64, stop: f64, count: usize, endpoint: bool) -> impl Iterator<Item = f64> {
    let div = if endpoint { count.saturating_sub(1).max(1) } else { count.max(1) };
    let step = (stop - start) / div as f64;
    (0..count).map(move |i| start + step * i as f64)
}

/// Two interleaving half-circles.
pub fn gen_moons(n: usize, noise_sd: f64, seed: u64) -> Result<PointDataset> {
    check_n(n)?;
    let noise = jitter(noise_sd)?;
    let mut rng = rng::stream(seed);
    let n_upper = n / 2;
    let n_lower = n - n_upper;
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for t in linspace(0.0, PI, n_upper, true) {
        points.extend_from_slice(&[libm::cos(t), libm::sin(t)]);
        labels.push(0);
    }
    for t in linspace(0.0, PI, n_lower, true) {
        points.extend_from_slice(&[1.0 - libm::cos(t), 0.5 - libm::sin(t)]);
        labels.push(1);
    }
    if let Some(noise) = noise {
        for p in &mut points {
            *p += noise.sample(&mut rng);
        }
    }
    PointDataset::new("moons", 2, points, Some(labels))
}

/// Two concentric circles, the inner one scaled by `factor`.
pub fn gen_circles(n: usize, factor: f64, noise_sd: f64, seed: u64) -> Result<PointDataset> {
    check_n(n)?;
    if !(factor > 0.0 && factor < 1.0) {
        return Err(invalid("circle factor must lie in (0, 1)"));
    }
    let noise = jitter(noise_sd)?;
    let mut rng = rng::stream(seed);
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (count, radius, label) in [(n_outer, 1.0, 0), (n_inner, factor, 1)] {
        for t in linspace(0.0, 2.0 * PI, count, false) {
            points.extend_from_slice(&[radius * libm::cos(t), radius * libm::sin(t)]);
            labels.push(label);
        }
    }
    if let Some(noise) = noise {
        for p in &mut points {
            *p += noise.sample(&mut rng);
        }
    }
    PointDataset::new("circles", 2, points, Some(labels))
}

/// Path graph over `n` class nodes; hop distance equals label distance.
pub fn gen_linear_order(n: usize) -> Result<RelationGraph> {
    gen_linear_order_with_items(n, 0)
}

/// Path over `classes` class nodes (ids `0..classes`) with `items_per_class`
/// item leaves attached to each class node (ids following, class-major).
pub fn gen_linear_order_with_items(classes: usize, items_per_class: usize) -> Result<RelationGraph> {
    if classes < 3 && items_per_class == 0 {
        return Err(invalid("linear order needs at least 3 nodes"));
    }
    if classes < 2 {
        return Err(invalid("linear order needs at least 2 classes"));
    }
    let mut g = RelationGraph::new(alloc::vec![NodeKind::FineClass; classes]);
    for c in 1..classes {
        g.add_edge(c - 1, c)?;
    }
    for c in 0..classes {
        for _ in 0..items_per_class {
            let item = g.add_node(NodeKind::Item);
            g.add_edge(item, c)?;
        }
    }
    Ok(g)
}

/// Class id of every node of a [`gen_linear_order_with_items`] graph.
pub fn linear_order_labels(classes: usize, items_per_class: usize) -> Vec<usize> {
    (0..classes)
        .chain((0..classes).flat_map(|c| core::iter::repeat_n(c, items_per_class)))
        .collect()
}

pub const DEFAULT_SUPERS: usize = 20;
pub const DEFAULT_FINES_PER_SUPER: usize = 5;

/// Two-level class hierarchy.
///
/// Node layout: super-class nodes first, then fine-class nodes
/// (super-major), then items (fine-major). Each item links to its fine
/// class and each fine class to its super class. Super classes are joined
/// pairwise so that every pair of nodes is reachable.
pub fn gen_hierarchy(items_per_fine: usize, fines_per_super: usize, supers: usize) -> Result<RelationGraph> {
    if items_per_fine == 0 || fines_per_super == 0 || supers == 0 {
        return Err(invalid("hierarchy counts must all be >= 1"));
    }
    let mut g = RelationGraph::new(alloc::vec![NodeKind::SuperClass; supers]);
    for a in 0..supers {
        for b in (a + 1)..supers {
            g.add_edge(a, b)?;
        }
    }
    let mut fines = Vec::with_capacity(supers * fines_per_super);
    for s in 0..supers {
        for _ in 0..fines_per_super {
            let f = g.add_node(NodeKind::FineClass);
            g.add_edge(f, s)?;
            fines.push(f);
        }
    }
    for &f in &fines {
        for _ in 0..items_per_fine {
            let item = g.add_node(NodeKind::Item);
            g.add_edge(item, f)?;
        }
    }
    Ok(g)
}
