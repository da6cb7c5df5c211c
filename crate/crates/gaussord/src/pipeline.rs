//! Pipeline stages behind the command-line subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gaussord_core::datasets::{
    gen_blobs, gen_circles, gen_hierarchy, gen_linear_order_with_items, gen_moons, linear_order_labels,
};
use gaussord_core::eval::{
    kmeans, link_prediction_scores, procrustes_classic, procrustes_distributional, purity, triplet_error,
};
use gaussord_core::trainer::{self, energy, TrainOutcome};
use gaussord_core::triplet::{budget_from_rule, sample_with_config, GraphOracle, PointOracle, TripletSample};
use gaussord_core::{GaussianEmbedding, NodeKind, PointDataset, RelationGraph, SamplingConfig, TrainConfig, Triplet};
use rand::Rng;

use crate::error::{Error, Result};
use crate::formats::{self, Metrics};
use crate::svg::{render_svg, PlotOptions};

/// A synthetic data source.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Blobs { n: usize, seed: u64 },
    Moons { n: usize, noise: f64, seed: u64 },
    Circles { n: usize, factor: f64, noise: f64, seed: u64 },
    Linear { classes: usize, items_per_class: usize },
    Hierarchy { items_per_fine: usize, fines_per_super: usize, supers: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Points(PointDataset),
    Graph { graph: RelationGraph, labels: Vec<usize> },
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Points(p) => p.len(),
            Dataset::Graph { graph, .. } => graph.node_count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match self {
            Dataset::Points(p) => p.labels(),
            Dataset::Graph { labels, .. } => Some(labels),
        }
    }
}

/// Super-class id for every node of a hierarchy graph, found by walking
/// item → fine → super edges.
pub fn hierarchy_labels(g: &RelationGraph) -> Vec<usize> {
    let supers: Vec<usize> = (0..g.node_count())
        .filter(|&v| g.kind(v) == NodeKind::SuperClass)
        .collect();
    let super_index = |v: usize| supers.iter().position(|&s| s == v);
    let owner = |v: usize| -> Option<usize> {
        match g.kind(v) {
            NodeKind::SuperClass => super_index(v),
            NodeKind::FineClass => g.neighbors(v).iter().find_map(|&u| {
                (g.kind(u) == NodeKind::SuperClass).then(|| super_index(u)).flatten()
            }),
            NodeKind::Item => None,
        }
    };
    (0..g.node_count())
        .map(|v| {
            owner(v)
                .or_else(|| g.neighbors(v).iter().find_map(|&u| owner(u)))
                .unwrap_or(0)
        })
        .collect()
}

pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    Ok(match *spec {
        DatasetSpec::Blobs { n, seed } => Dataset::Points(gen_blobs(n, seed)?),
        DatasetSpec::Moons { n, noise, seed } => Dataset::Points(gen_moons(n, noise, seed)?),
        DatasetSpec::Circles { n, factor, noise, seed } => Dataset::Points(gen_circles(n, factor, noise, seed)?),
        DatasetSpec::Linear {
            classes,
            items_per_class,
        } => Dataset::Graph {
            graph: gen_linear_order_with_items(classes, items_per_class)?,
            labels: linear_order_labels(classes, items_per_class),
        },
        DatasetSpec::Hierarchy {
            items_per_fine,
            fines_per_super,
            supers,
        } => {
            let graph = gen_hierarchy(items_per_fine, fines_per_super, supers)?;
            let labels = hierarchy_labels(&graph);
            Dataset::Graph { graph, labels }
        }
    })
}

/// Path of the labels file written next to a graph file.
pub fn labels_path(graph_path: &Path) -> PathBuf {
    with_suffix(graph_path, ".labels")
}

pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes a dataset: points CSV, or edge list plus a `.labels` file.
pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    match ds {
        Dataset::Points(p) => formats::save_points(path, p),
        Dataset::Graph { graph, labels } => {
            formats::save_graph(path, graph)?;
            let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
            formats::write_file(&labels_path(path), &text)
        }
    }
}

/// Where triplet answers come from.
pub enum TripletSource<'a> {
    Points(&'a PointDataset),
    Graph(&'a RelationGraph),
}

/// Samples, splits and noises a triplet set. `budget` overrides the
/// `p · d² · n · ln n` rule, which uses the embedding dimension `dim`.
pub fn make_triplets(
    source: TripletSource<'_>,
    cfg: &SamplingConfig,
    dim: usize,
    budget: Option<usize>,
) -> Result<TripletSample> {
    cfg.validate()?;
    let n = match source {
        TripletSource::Points(p) => p.len(),
        TripletSource::Graph(g) => g.node_count(),
    };
    let budget = match budget {
        Some(0) => return Err(Error::Usage("triplet budget must be >= 1".into())),
        Some(b) => b,
        None => budget_from_rule(n, dim, cfg.budget_multiplier)?,
    };
    Ok(match source {
        TripletSource::Points(p) => sample_with_config(cfg, budget, &PointOracle::new(p), None)?,
        TripletSource::Graph(g) => {
            let oracle = GraphOracle::new(g);
            sample_with_config(cfg, budget, &oracle, Some(&oracle))?
        }
    })
}

pub fn save_triplet_sample(prefix: &Path, sample: &TripletSample) -> Result<(PathBuf, PathBuf)> {
    let (train, test) = (with_suffix(prefix, ".train"), with_suffix(prefix, ".test"));
    formats::save_triplets(&train, &sample.train)?;
    formats::save_triplets(&test, &sample.test)?;
    Ok((train, test))
}

/// Item count implied by the triplet files.
pub fn infer_item_count(train: &[Triplet], test: &[Triplet]) -> usize {
    train.iter().chain(test).map(|t| t.max_index() + 1).max().unwrap_or(0)
}

/// Trains and stamps the wall-clock time into the report.
pub fn embed(train: &[Triplet], test: &[Triplet], n: usize, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let start = Instant::now();
    let mut out = trainer::train(train, test, n, cfg)?;
    out.report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Report file body. Wall-clock time is left out so reruns are
/// byte-identical.
pub fn report_metrics(out: &TrainOutcome) -> Metrics {
    let r = &out.report;
    let mut m = Metrics::new();
    m.set("epochs", r.epochs);
    m.set("converged", r.converged);
    m.set_f64("final_loss", r.final_loss());
    m.set_f64("final_train_error", r.final_train_error());
    match r.held_out_error {
        Some(e) => m.set_f64("held_out_error", e),
        None => m.set("held_out_error", "none"),
    }
    let mean_sigma = mean_variance(&out.embeddings);
    m.set_f64("mean_sigma", mean_sigma);
    let join = |v: &[f64]| v.iter().map(|&x| formats::fmt_f64(x)).collect::<Vec<_>>().join(",");
    m.set("epoch_loss", join(&r.epoch_loss));
    m.set("epoch_train_error", join(&r.epoch_train_error));
    m
}

/// Mean over items of the mean variance coordinate.
pub fn mean_variance(embeddings: &[GaussianEmbedding]) -> f64 {
    let per_item = embeddings.iter().map(|z| z.trace() / z.dim() as f64);
    per_item.sum::<f64>() / embeddings.len().max(1) as f64
}

/// Inputs to [`evaluate`]; everything but the embedding is optional.
#[derive(Default)]
pub struct EvalInputs<'a> {
    pub embeddings: &'a [GaussianEmbedding],
    pub test: Option<&'a [Triplet]>,
    pub ground_truth: Option<&'a PointDataset>,
    pub labels: Option<&'a [usize]>,
    pub clusters: Option<usize>,
    pub graph: Option<&'a RelationGraph>,
    pub seed: u64,
}

/// Computes every metric the inputs allow. Missing inputs yield `skipped`.
pub fn evaluate(inp: &EvalInputs<'_>) -> Result<Metrics> {
    let n = inp.embeddings.len();
    let mut m = Metrics::new();

    match inp.test {
        Some(test) => {
            if let Some(t) = test.iter().find(|t| t.max_index() >= n) {
                return Err(Error::Data(format!(
                    "triplet ({},{},{}) references item {} but the embedding has {n} items",
                    t.i,
                    t.j,
                    t.k,
                    t.max_index()
                )));
            }
            m.set_f64("err", triplet_error(test, inp.embeddings, energy)?);
        }
        None => m.set("err", "skipped"),
    }

    match inp.ground_truth {
        Some(gt) => {
            if gt.len() != n {
                return Err(Error::Data(format!(
                    "ground truth has {} points but the embedding has {n} items",
                    gt.len()
                )));
            }
            let rows: Vec<&[f64]> = gt.rows().collect();
            let mus: Vec<&[f64]> = inp.embeddings.iter().map(GaussianEmbedding::mu).collect();
            m.set_f64("procrustes", procrustes_distributional(&rows, inp.embeddings)?);
            m.set_f64("procrustes_mu", procrustes_classic(&rows, &mus)?);
        }
        None => m.set("procrustes", "skipped"),
    }

    let labels = inp.labels.or_else(|| inp.ground_truth.and_then(PointDataset::labels));
    match labels {
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::Data(format!("{} labels for {n} items", labels.len())));
            }
            let k = inp
                .clusters
                .unwrap_or_else(|| labels.iter().copied().collect::<std::collections::BTreeSet<_>>().len());
            let features: Vec<Vec<f64>> = inp.embeddings.iter().map(|z| [z.mu(), z.sigma()].concat()).collect();
            let km = kmeans(&features, k, inp.seed)?;
            m.set_f64("purity", purity(&km.assignment, labels)?);
        }
        None => m.set("purity", "skipped"),
    }

    match inp.graph {
        Some(g) => {
            if g.node_count() != n {
                return Err(Error::Data(format!(
                    "graph has {} nodes but the embedding has {n} items",
                    g.node_count()
                )));
            }
            let positive = g.edges().to_vec();
            let negative = sample_non_edges(g, positive.len(), inp.seed)?;
            let scores = link_prediction_scores(&positive, &negative, inp.embeddings)?;
            m.set_f64("auc", scores.auc);
            m.set_f64("ap", scores.ap);
        }
        None => {
            m.set("auc", "skipped");
            m.set("ap", "skipped");
        }
    }
    m.set_f64("mean_sigma", mean_variance(inp.embeddings));
    Ok(m)
}

/// Uniformly drawn non-adjacent node pairs, as many as requested (fewer if
/// the graph is nearly complete).
pub fn sample_non_edges(g: &RelationGraph, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let n = g.node_count();
    let total_pairs = n * n.saturating_sub(1) / 2;
    let available = total_pairs.saturating_sub(g.edges().len());
    if available == 0 {
        return Err(Error::Data("graph is complete; no negative pairs exist".into()));
    }
    let want = count.min(available);
    let mut rng = gaussord_core::rng::stream(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || g.has_edge(u, v) || !seen.insert(key) {
            continue;
        }
        out.push(key);
    }
    Ok(out)
}

pub fn plot(embeddings: &[GaussianEmbedding], labels: Option<&[usize]>, opts: &PlotOptions) -> Result<String> {
    render_svg(embeddings, labels, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_labels_follow_super_classes() {
        let g = gen_hierarchy(2, 2, 3).unwrap();
        let labels = hierarchy_labels(&g);
        assert_eq!(&labels[..3], &[0, 1, 2]);
        for v in 0..g.node_count() {
            if g.kind(v) == NodeKind::Item {
                let fine = g.neighbors(v)[0];
                assert_eq!(labels[v], labels[fine]);
            }
        }
    }

    #[test]
    fn non_edges_are_not_edges() {
        let g = gen_linear_order_with_items(4, 2).unwrap();
        let neg = sample_non_edges(&g, 10, 3).unwrap();
        assert_eq!(neg.len(), 10);
        assert!(neg.iter().all(|&(u, v)| u != v && !g.has_edge(u, v)));
    }

    #[test]
    fn evaluate_perfect_embedding() {
        let ds = gen_blobs(30, 1).unwrap();
        let zs: Vec<_> = ds.rows().map(|r| GaussianEmbedding::dirac(r.to_vec()).unwrap()).collect();
        let sample = make_triplets(TripletSource::Points(&ds), &SamplingConfig::default(), 2, Some(200)).unwrap();
        let m = evaluate(&EvalInputs {
            embeddings: &zs,
            test: Some(&sample.test),
            ground_truth: Some(&ds),
            ..EvalInputs::default()
        })
        .unwrap();
        assert_eq!(m.get_f64("err"), Some(0.0));
        assert!(m.get_f64("procrustes").unwrap() < 1e-12);
        assert_eq!(m.get_f64("purity"), Some(1.0));
        assert_eq!(m.get("auc"), Some("skipped"));
    }

    #[test]
    fn evaluate_rejects_id_mismatch() {
        let ds = gen_blobs(30, 1).unwrap();
        let zs: Vec<_> = ds.rows().take(10).map(|r| GaussianEmbedding::dirac(r.to_vec()).unwrap()).collect();
        let err = evaluate(&EvalInputs {
            embeddings: &zs,
            ground_truth: Some(&ds),
            ..EvalInputs::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
