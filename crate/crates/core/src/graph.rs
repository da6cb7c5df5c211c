//! Undirected relation graphs over items and class nodes.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Item,
    FineClass,
    SuperClass,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Item => "item",
            NodeKind::FineClass => "fine",
            NodeKind::SuperClass => "super",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "item" => Some(NodeKind::Item),
            "fine" | "class" => Some(NodeKind::FineClass),
            "super" => Some(NodeKind::SuperClass),
            _ => None,
        }
    }
}

/// Simple undirected graph: no self-loops, no duplicate edges.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationGraph {
    kinds: Vec<NodeKind>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl RelationGraph {
    pub fn new(kinds: Vec<NodeKind>) -> Self {
        let n = kinds.len();
        Self {
            kinds,
            edges: Vec::new(),
            adjacency: alloc::vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, rejecting loops and repeated edges.
    pub fn from_edges(kinds: Vec<NodeKind>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(kinds);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, kind: NodeKind) -> usize {
        self.kinds.push(kind);
        self.adjacency.push(Vec::new());
        self.kinds.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.node_count();
        for idx in [u, v] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if u == v {
            return Err(invalid(alloc::format!("self-loop on node {u}")));
        }
        if self.adjacency[u].contains(&v) {
            return Err(invalid(alloc::format!("duplicate edge {u}-{v}")));
        }
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.edges.push((u, v));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|a| a.contains(&v))
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    /// Unweighted shortest-path hop counts from `source`; `None` if unreachable.
    pub fn bfs(&self, source: usize) -> Result<Vec<Option<usize>>> {
        let n = self.node_count();
        if source >= n {
            return Err(Error::IndexOutOfRange { index: source, len: n });
        }
        let mut dist = alloc::vec![None; n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    pub fn hop(&self, u: usize, v: usize) -> Result<usize> {
        self.bfs(u)?
            .get(v)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: v,
                len: self.node_count(),
            })?
            .ok_or(Error::Unreachable(u, v))
    }

    pub fn is_connected(&self) -> bool {
        match self.node_count() {
            0 => true,
            _ => self.bfs(0).map(|d| d.iter().all(Option::is_some)).unwrap_or(false),
        }
    }

    /// All-pairs hop table, one BFS per node.
    pub fn hop_table(&self) -> HopTable {
        let n = self.node_count();
        let mut hops = alloc::vec![u32::MAX; n * n];
        for s in 0..n {
            // bfs cannot fail for s < n
            if let Ok(d) = self.bfs(s) {
                for (t, h) in d.into_iter().enumerate() {
                    if let Some(h) = h {
                        hops[s * n + t] = h as u32;
                    }
                }
            }
        }
        HopTable { n, hops }
    }
}

/// Dense all-pairs hop counts.
#[derive(Debug, Clone)]
pub struct HopTable {
    n: usize,
    hops: Vec<u32>,
}

impl HopTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hop(&self, u: usize, v: usize) -> Result<usize> {
        for idx in [u, v] {
            if idx >= self.n {
                return Err(Error::IndexOutOfRange { index: idx, len: self.n });
            }
        }
        match self.hops[u * self.n + v] {
            u32::MAX => Err(Error::Unreachable(u, v)),
            h => Ok(h as usize),
        }
    }

    pub(crate) fn row(&self, u: usize) -> &[u32] {
        &self.hops[u * self.n..(u + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> RelationGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        RelationGraph::from_edges(alloc::vec![NodeKind::Item; n], &edges).unwrap()
    }

    #[test]
    fn bfs_on_path() {
        let g = path(4);
        assert_eq!(g.hop(0, 3).unwrap(), 3);
        assert_eq!(g.hop_table().hop(3, 1).unwrap(), 2);
        assert!(g.is_connected());
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        let mut g = path(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(1, 0).is_err());
        assert!(matches!(g.add_edge(0, 7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn unreachable_pair() {
        let g = RelationGraph::new(alloc::vec![NodeKind::Item; 2]);
        assert_eq!(g.hop(0, 1), Err(Error::Unreachable(0, 1)));
        assert_eq!(g.hop_table().hop(1, 0), Err(Error::Unreachable(1, 0)));
        assert!(!g.is_connected());
    }
}
