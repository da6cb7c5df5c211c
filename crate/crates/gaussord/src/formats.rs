//! Plain-text file formats.
//!
//! | File | Layout |
//! |------|--------|
//! | triplets | one `i,j,k,y` per line, `y ∈ {-1, 1}`; `#` lines are comments |
//! | points | optional header, rows `x_0,…,x_{d-1}[,label]` |
//! | graph | edge lines `u v [kind_u kind_v]`, kinds `item`/`fine`/`super` |
//! | embedding | header `id,mu_0,…,sigma_0,…`, one row per item |
//! | metrics | `key=value` lines |
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gaussord_core::{GaussianEmbedding, NodeKind, PointDataset, RelationGraph, Triplet};

use crate::error::{Error, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

// ---- triplets ----

pub fn format_triplets(triplets: &[Triplet]) -> String {
    let mut out = String::with_capacity(triplets.len() * 16);
    for t in triplets {
        let _ = writeln!(out, "{},{},{},{}", t.i, t.j, t.k, t.label);
    }
    out
}

pub fn parse_triplets(text: &str, source: &str) -> Result<Vec<Triplet>> {
    data_lines(text)
        .map(|(line, l)| {
            let bad = |msg: &str| Error::parse(source, line, msg);
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 comma-separated fields i,j,k,y"));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad index {s:?}")));
            let label = fields[3]
                .parse::<i8>()
                .map_err(|_| bad(&format!("bad label {:?}", fields[3])))?;
            Triplet::new(idx(fields[0])?, idx(fields[1])?, idx(fields[2])?, label).map_err(|e| bad(&e.to_string()))
        })
        .collect()
}

pub fn save_triplets(path: &Path, triplets: &[Triplet]) -> Result<()> {
    write_file(path, &format_triplets(triplets))
}

pub fn load_triplets(path: &Path) -> Result<Vec<Triplet>> {
    parse_triplets(&read(path)?, &path.display().to_string())
}

// ---- points ----

pub fn format_points(ds: &PointDataset) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..ds.dim()).map(|k| format!("x_{k}")).collect();
    out.push_str(&header.join(","));
    if ds.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, row) in ds.rows().enumerate() {
        let cols: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cols.join(","));
        if let Some(labels) = ds.labels() {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    out
}

/// Parses a points CSV. A first line that does not parse as numbers is a
/// header; a header whose last column is `label` marks the labeled layout.
/// Without a header, rows are unlabeled.
pub fn parse_points(text: &str, source: &str, name: &str) -> Result<PointDataset> {
    let mut lines = data_lines(text).peekable();
    let mut labeled = false;
    if let Some(&(_, first)) = lines.peek() {
        let is_header = first.split(',').any(|f| f.trim().parse::<f64>().is_err());
        if is_header {
            labeled = first.split(',').next_back().map(str::trim) == Some("label");
            lines.next();
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (line, l) in lines {
        let bad = |msg: String| Error::parse(source, line, &msg);
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if *width.get_or_insert(fields.len()) != fields.len() {
            return Err(bad(format!(
                "ragged row: {} columns, expected {}",
                fields.len(),
                width.unwrap_or(0)
            )));
        }
        let coords = if labeled { &fields[..fields.len() - 1] } else { &fields[..] };
        if coords.is_empty() {
            return Err(bad("row has no coordinates".into()));
        }
        let row = coords
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad number {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if labeled {
            let f = fields[fields.len() - 1];
            labels.push(f.parse::<usize>().map_err(|_| bad(format!("bad label {f:?}")))?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{source}: no points")));
    }
    PointDataset::from_rows(name, &rows, labeled.then_some(labels)).map_err(|e| Error::Data(format!("{source}: {e}")))
}

pub fn save_points(path: &Path, ds: &PointDataset) -> Result<()> {
    write_file(path, &format_points(ds))
}

pub fn load_points(path: &Path) -> Result<PointDataset> {
    let name = path.file_stem().map_or_else(|| "points".into(), |s| s.to_string_lossy().into_owned());
    parse_points(&read(path)?, &path.display().to_string(), &name)
}

// ---- graphs ----

pub fn format_graph(g: &RelationGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes={}", g.node_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v} {} {}", g.kind(u).as_str(), g.kind(v).as_str());
    }
    out
}

/// Parses an edge list. Node count is one past the largest id; nodes never
/// given a kind default to `item`.
pub fn parse_graph(text: &str, source: &str) -> Result<RelationGraph> {
    let mut edges = Vec::new();
    let mut kinds: BTreeMap<usize, NodeKind> = BTreeMap::new();
    let mut declared_nodes = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let l = line.trim();
        if let Some(meta) = l.strip_prefix('#') {
            if let Some(n) = meta.trim().strip_prefix("nodes=") {
                declared_nodes = n.trim().parse().unwrap_or(0);
            }
            continue;
        }
        if l.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::parse(source, line_no, &msg);
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 4 {
            return Err(bad("expected `u v` or `u v kind_u kind_v`".into()));
        }
        let u: usize = fields[0].parse().map_err(|_| bad(format!("bad node id {:?}", fields[0])))?;
        let v: usize = fields[1].parse().map_err(|_| bad(format!("bad node id {:?}", fields[1])))?;
        if fields.len() == 4 {
            for (node, f) in [(u, fields[2]), (v, fields[3])] {
                let kind = NodeKind::parse(f).ok_or_else(|| bad(format!("unknown node kind {f:?}")))?;
                if let Some(prev) = kinds.insert(node, kind) {
                    if prev != kind {
                        return Err(bad(format!("node {node} given conflicting kinds")));
                    }
                }
            }
        }
        edges.push((u, v, line_no));
    }
    if edges.is_empty() {
        return Err(Error::Data(format!("{source}: no edges")));
    }
    let n = edges
        .iter()
        .map(|&(u, v, _)| u.max(v) + 1)
        .max()
        .unwrap_or(0)
        .max(declared_nodes);
    let mut g = RelationGraph::new((0..n).map(|v| kinds.get(&v).copied().unwrap_or(NodeKind::Item)).collect());
    for (u, v, line) in edges {
        g.add_edge(u, v).map_err(|e| Error::parse(source, line, &e.to_string()))?;
    }
    Ok(g)
}

pub fn save_graph(path: &Path, g: &RelationGraph) -> Result<()> {
    write_file(path, &format_graph(g))
}

pub fn load_graph(path: &Path) -> Result<RelationGraph> {
    parse_graph(&read(path)?, &path.display().to_string())
}

// ---- embeddings ----

pub fn format_embeddings(embeddings: &[GaussianEmbedding]) -> String {
    let d = embeddings.first().map_or(0, GaussianEmbedding::dim);
    let mut out = String::from("id");
    for k in 0..d {
        let _ = write!(out, ",mu_{k}");
    }
    for k in 0..d {
        let _ = write!(out, ",sigma_{k}");
    }
    out.push('\n');
    for (id, z) in embeddings.iter().enumerate() {
        let _ = write!(out, "{id}");
        for &v in z.mu().iter().chain(z.sigma()) {
            let _ = write!(out, ",{}", fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_embeddings(text: &str, source: &str) -> Result<Vec<GaussianEmbedding>> {
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::Data(format!("{source}: empty embedding file")))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let d = cols.iter().filter(|c| c.starts_with("mu_")).count();
    if cols.first() != Some(&"id") || d == 0 || cols.len() != 1 + 2 * d {
        return Err(Error::parse(source, 1, "expected header id,mu_0..,sigma_0.."));
    }
    let mut out = Vec::new();
    for (line, l) in lines {
        let bad = |msg: String| Error::parse(source, line, &msg);
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(bad(format!("{} columns, expected {}", fields.len(), cols.len())));
        }
        let id: usize = fields[0].parse().map_err(|_| bad(format!("bad id {:?}", fields[0])))?;
        if id != out.len() {
            return Err(bad(format!("ids must run 0..n in order; found {id}, expected {}", out.len())));
        }
        let vals = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad number {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let z = GaussianEmbedding::new(vals[..d].to_vec(), vals[d..].to_vec()).map_err(|e| bad(e.to_string()))?;
        out.push(z);
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{source}: no embedding rows")));
    }
    Ok(out)
}

pub fn save_embeddings(path: &Path, embeddings: &[GaussianEmbedding]) -> Result<()> {
    write_file(path, &format_embeddings(embeddings))
}

pub fn load_embeddings(path: &Path) -> Result<Vec<GaussianEmbedding>> {
    parse_embeddings(&read(path)?, &path.display().to_string())
}

/// Labels file: one nonnegative integer per line.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let source = path.display().to_string();
    data_lines(&read(path)?)
        .map(|(line, l)| l.parse().map_err(|_| Error::parse(&source, line, &format!("bad label {l:?}"))))
        .collect()
}

// ---- metrics ----

/// Ordered `key=value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    entries: Vec<(String, String)>,
}

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_owned(), value)),
        }
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::new();
        for (line, l) in data_lines(text) {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse("metrics", line, "expected key=value"))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussord_core::datasets::{gen_blobs, gen_hierarchy};

    #[test]
    fn triplet_lines() {
        let ts = vec![Triplet::new(0, 1, 2, 1).unwrap(), Triplet::new(3, 2, 1, -1).unwrap()];
        let text = format_triplets(&ts);
        assert_eq!(text, "0,1,2,1\n3,2,1,-1\n");
        let with_comment = format!("# header\n{text}\n");
        assert_eq!(parse_triplets(&with_comment, "t").unwrap(), ts);
        let err = parse_triplets("0,1,2,1\n0,1,2,0\n", "t").unwrap_err();
        assert!(err.to_string().contains("t:2"), "{err}");
        assert!(parse_triplets("0,0,2,1\n", "t").is_err());
        assert!(parse_triplets("0,1,2\n", "t").is_err());
    }

    #[test]
    fn points_round_trip_exactly() {
        let ds = gen_blobs(100, 3).unwrap();
        let back = parse_points(&format_points(&ds), "p", "blobs").unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn points_headerless_and_errors() {
        let ds = parse_points("1,2\n3,4\n5,6.5\n", "p", "x").unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.labels().is_none());
        assert!(parse_points("", "p", "x").is_err());
        let err = parse_points("1,2\n3,4\n5\n", "p", "x").unwrap_err();
        assert!(err.to_string().contains("p:3"), "{err}");
        assert!(err.to_string().contains("ragged"));
        assert!(parse_points("1,2\n3,abc\n5,6\n", "p", "x").is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = gen_hierarchy(2, 2, 3).unwrap();
        let back = parse_graph(&format_graph(&g), "g").unwrap();
        assert_eq!(back, g);
        let plain = parse_graph("0 1\n1 2\n", "g").unwrap();
        assert_eq!(plain.node_count(), 3);
        assert!(parse_graph("0 1\n1 1\n", "g").unwrap_err().to_string().contains("g:2"));
        assert!(parse_graph("0 1 item wizard\n", "g").is_err());
        assert!(parse_graph("", "g").is_err());
    }

    #[test]
    fn embeddings_round_trip() {
        let zs = vec![
            GaussianEmbedding::new(vec![0.1, -2.0 / 3.0], vec![1e-6, 4.605170185988091]).unwrap(),
            GaussianEmbedding::new(vec![1e300, 0.0], vec![0.5, 0.25]).unwrap(),
        ];
        let text = format_embeddings(&zs);
        assert!(text.starts_with("id,mu_0,mu_1,sigma_0,sigma_1\n"));
        assert_eq!(parse_embeddings(&text, "e").unwrap(), zs);
        assert!(parse_embeddings("id,mu_0,sigma_0\n1,0,1\n", "e").is_err());
    }

    #[test]
    fn metrics_render_and_parse() {
        let mut m = Metrics::new();
        m.set_f64("err", 0.25);
        m.set("procrustes", "skipped");
        let text = m.render();
        assert!(text.starts_with("err=2.5000000000000000e-1\n"));
        let back = Metrics::parse(&text).unwrap();
        assert_eq!(back.get_f64("err"), Some(0.25));
        assert_eq!(back.get("procrustes"), Some("skipped"));
    }
}
