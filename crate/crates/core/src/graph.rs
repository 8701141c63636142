//! Weighted undirected graphs, Laplacians and hop distances.
//!
//! Graphs are immutable once built. Vertex ids are dense, `0..n`.
//!
//! The edge-list text format is line oriented:
//!
//! ```text
//! # comments and blank lines are ignored
//! n 3
//! 0 1 1
//! 1 2 0.25
//! ```
//!
//! The first non-comment line is the header `n <count>`; every following line
//! is one undirected edge `u v w` with `u != v` and `w > 0`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    Unnormalized,
    #[default]
    Normalized,
}

impl Graph {
    /// Builds a graph from undirected edges. Edges are stored with `u < v`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut adjacency = DMatrix::zeros(n, n);
        let mut stored = Vec::new();
        for e in edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidArgument(format!("self loop at vertex {}", e.u)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            if adjacency[(u, v)] != 0.0 {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[(u, v)] = e.weight;
            adjacency[(v, u)] = e.weight;
            stored.push(Edge { u, v, weight: e.weight });
        }
        stored.sort_by_key(|a| (a.u, a.v));

        let mut neighbors = vec![Vec::new(); n];
        for e in &stored {
            neighbors[e.u].push(e.v);
            neighbors[e.v].push(e.u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        Ok(Self {
            n,
            edges: stored,
            adjacency,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.adjacency.row(v).sum()
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |v, _| self.degree(v))
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || bfs(self, 0).iter().all(|d| d.is_some())
    }

    /// Graph Laplacian `D - A`, or `D^{-1/2} (D - A) D^{-1/2}` for the normalized kind.
    pub fn laplacian(&self, kind: LaplacianKind) -> Result<DMatrix<f64>> {
        let degrees = self.degrees();
        let mut l = -self.adjacency.clone();
        for v in 0..self.n {
            l[(v, v)] += degrees[v];
        }
        match kind {
            LaplacianKind::Unnormalized => Ok(l),
            LaplacianKind::Normalized => {
                if let Some(v) = degrees.iter().position(|&d| d <= 0.0) {
                    return Err(Error::IsolatedVertex(v));
                }
                let scale = degrees.map(|d| 1.0 / d.sqrt());
                Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
                    scale[i] * l[(i, j)] * scale[j]
                }))
            }
        }
    }

    /// All-pairs unweighted hop counts by breadth-first search.
    pub fn hop_distances(&self) -> Result<DelayMatrix> {
        let n = self.n;
        let mut tau = vec![0usize; n * n];
        for src in 0..n {
            let dist = bfs(self, src);
            for (dst, d) in dist.into_iter().enumerate() {
                match d {
                    Some(d) => tau[src * n + dst] = d,
                    None => return Err(Error::Disconnected { from: src, to: dst }),
                }
            }
        }
        Ok(DelayMatrix::from_flat(n, tau))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
        out
    }

    pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if n.is_none() {
                match fields.as_slice() {
                    ["n", count] => {
                        n = Some(
                            count
                                .parse::<usize>()
                                .map_err(|e| parse_err(line_no, e.to_string()))?,
                        )
                    }
                    _ => return Err(parse_err(line_no, "expected header `n <count>`".into())),
                }
                continue;
            }
            let [u, v, w] = fields.as_slice() else {
                return Err(parse_err(line_no, "expected `u v w`".into()));
            };
            let u = u.parse().map_err(|e: std::num::ParseIntError| parse_err(line_no, e.to_string()))?;
            let v = v.parse().map_err(|e: std::num::ParseIntError| parse_err(line_no, e.to_string()))?;
            let weight = w
                .parse()
                .map_err(|e: std::num::ParseFloatError| parse_err(line_no, e.to_string()))?;
            edges.push(Edge { u, v, weight });
        }
        let n = n.ok_or_else(|| parse_err(0, "missing header `n <count>`".into()))?;
        Self::from_edges(n, edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text, path)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn bfs(g: &Graph, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or_default();
        for &w in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Symmetric union of each point's `k` nearest Euclidean neighbors, weighted
/// by inverse squared distance. Equal distances resolve to the lower index.
pub fn knn_geometric_graph(points: &[[f64; 2]], k: usize) -> Result<Graph> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 0 < k < {n}"
        )));
    }
    let dist2 = |i: usize, j: usize| {
        let dx = points[i][0] - points[j][0];
        let dy = points[i][1] - points[j][1];
        dx * dx + dy * dy
    };
    for i in 0..n {
        for j in i + 1..n {
            if dist2(i, j) == 0.0 {
                return Err(Error::DuplicatePoint(i, j));
            }
        }
    }

    let mut selected = vec![false; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| dist2(i, a).total_cmp(&dist2(i, b)).then(a.cmp(&b)));
        for &j in &order[..k] {
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            selected[u * n + v] = true;
        }
    }

    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| selected[u * n + v]).map(|(u, v)| Edge {
            u,
            v,
            weight: 1.0 / dist2(u, v),
        });
    Graph::from_edges(n, edges.collect::<Vec<_>>())
}

/// Draws `n` points uniformly in the unit square and joins each to its `k`
/// nearest neighbors, redrawing until the graph is connected.
pub fn random_sensor_graph(n: usize, k: usize, seed: u64) -> Result<(Vec<[f64; 2]>, Graph)> {
    const MAX_DRAWS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for draw in 0..MAX_DRAWS {
        let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let graph = match knn_geometric_graph(&points, k) {
            Err(Error::DuplicatePoint(..)) => continue,
            other => other?,
        };
        if graph.is_connected() {
            if draw > 0 {
                log::debug!("sensor graph connected after {} draws", draw + 1);
            }
            return Ok((points, graph));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no connected {k}-nearest-neighbor graph on {n} points in {MAX_DRAWS} draws"
    )))
}

/// Hop-count transmission delays between every pair of vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayMatrix {
    n: usize,
    tau: Vec<usize>,
    tau_max: usize,
}

impl DelayMatrix {
    fn from_flat(n: usize, tau: Vec<usize>) -> Self {
        let tau_max = tau.iter().copied().max().unwrap_or(0);
        Self { n, tau, tau_max }
    }

    /// All delays zero: every node sees every sensor error in the same step.
    pub fn zeros(n: usize) -> Self {
        Self::from_flat(n, vec![0; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> usize {
        self.tau[u * self.n + v]
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// Largest delay from any vertex of `sources` to any vertex.
    pub fn max_from(&self, sources: &[usize]) -> usize {
        sources
            .iter()
            .flat_map(|&u| self.tau[u * self.n..(u + 1) * self.n].iter().copied())
            .max()
            .unwrap_or(0)
    }
}
