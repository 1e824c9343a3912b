//! Graph representation and exact distance computation.
//!
//! Graphs are simple, undirected and connected; vertex ids are dense
//! `0..n`. Distances are BFS hop counts stored as a full matrix so that
//! every `d(x, y)` and `d(x, U)` query afterwards is O(1)/O(|U|).

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("missing or malformed header line, expected \"n m\"")]
    BadHeader,
    #[error("malformed edge line {0:?}")]
    BadEdgeLine(String),
    #[error("edge count mismatch: header says {expected}, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("graph is disconnected: vertex {0} unreachable from 0")]
    Disconnected(VertexId),
    #[error("graph must have at least one vertex")]
    Empty,
}

/// Immutable simple connected undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<VertexId>>,
}

impl Graph {
    /// Builds a graph from an edge list, validating simplicity and connectivity.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj[u].contains(&v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph { n, adj };
        if let Some(unreached) = g.first_unreachable() {
            return Err(GraphError::Disconnected(unreached));
        }
        Ok(g)
    }

    /// Parses the edge-list text format: first line `n m`, then `m` lines `u v`.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(GraphError::BadHeader)?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(GraphError::BadHeader)?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(GraphError::BadHeader)?;
        if it.next().is_some() {
            return Err(GraphError::BadHeader);
        }
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let parse2 = (|| {
                let u: VertexId = it.next()?.parse().ok()?;
                let v: VertexId = it.next()?.parse().ok()?;
                if it.next().is_some() {
                    return None;
                }
                Some((u, v))
            })();
            let (u, v) = parse2.ok_or_else(|| GraphError::BadEdgeLine(line.to_string()))?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::EdgeCountMismatch {
                expected: m,
                found: edges.len(),
            });
        }
        Graph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Edges as ordered pairs (u < v), sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True iff `set` induces a clique.
    pub fn is_clique(&self, set: &[VertexId]) -> bool {
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if !self.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    fn first_unreachable(&self) -> Option<VertexId> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    /// Serializes back to the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n, edges.len());
        for (u, v) in edges {
            out.push_str(&format!("{} {}\n", u, v));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_edge_list())
    }
}

/// All-pairs BFS hop distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut dist = vec![u32::MAX; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for &v in g.neighbors(u) {
                    if row[v] == u32::MAX {
                        row[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        DistanceMatrix { n, dist }
    }

    #[inline]
    pub fn d(&self, x: VertexId, y: VertexId) -> u32 {
        self.dist[x * self.n + y]
    }

    /// Minimum distance from `x` to any vertex of `set`.
    pub fn dist_to_set(&self, x: VertexId, set: &[VertexId]) -> u32 {
        set.iter().map(|&u| self.d(x, u)).min().unwrap_or(u32::MAX)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}
