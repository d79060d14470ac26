//! Shared domain types: joint-degree matrices, degree classes, degree
//! sequences, labeled simple graphs and weighted samples.
//!
//! Degrees are 1-indexed in every public accessor (`jdm.get(2, 3)` is the
//! number of edges between degree-2 and degree-3 nodes); storage is 0-indexed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Symmetric matrix of edge counts between degree classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Jdm {
    dim: usize,
    entries: Vec<usize>,
}

impl Jdm {
    pub fn zeros(dim: usize) -> Self {
        Jdm {
            dim,
            entries: vec![0; dim * dim],
        }
    }

    /// Builds a matrix from row-major entries, checking symmetry.
    pub fn new(dim: usize, entries: Vec<usize>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {} entries, got {}", dim * dim, entries.len()),
            });
        }
        let jdm = Jdm { dim, entries };
        jdm.check_symmetric()?;
        Ok(jdm)
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("row has {} entries, expected {dim}", row.len()),
                });
            }
            entries.extend_from_slice(row);
        }
        Jdm::new(dim, entries)
    }

    fn check_symmetric(&self) -> Result<()> {
        for a in 1..=self.dim {
            for b in (a + 1)..=self.dim {
                let (f, r) = (self.get(a, b), self.get(b, a));
                if f != r {
                    return Err(Error::Asymmetric {
                        alpha: a,
                        beta: b,
                        forward: f,
                        backward: r,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest degree Δ representable by this matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry J_{αβ}; zero outside the matrix.
    #[inline]
    pub fn get(&self, alpha: usize, beta: usize) -> usize {
        if alpha == 0 || beta == 0 || alpha > self.dim || beta > self.dim {
            return 0;
        }
        self.entries[(alpha - 1) * self.dim + (beta - 1)]
    }

    /// Sets J_{αβ} and J_{βα}.
    pub fn set(&mut self, alpha: usize, beta: usize, value: usize) {
        assert!(alpha >= 1 && beta >= 1 && alpha <= self.dim && beta <= self.dim);
        self.entries[(alpha - 1) * self.dim + (beta - 1)] = value;
        self.entries[(beta - 1) * self.dim + (alpha - 1)] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.entries.chunks(self.dim.max(1)).take(self.dim)
    }

    /// Total number of edges, Σ_{α≤β} J_{αβ}.
    pub fn edge_count(&self) -> usize {
        (1..=self.dim)
            .flat_map(|a| (a..=self.dim).map(move |b| (a, b)))
            .map(|(a, b)| self.get(a, b))
            .sum()
    }

    /// Copy with trailing all-zero rows and columns removed.
    pub fn trimmed(&self) -> Jdm {
        let mut dim = self.dim;
        while dim > 0 && (1..=self.dim).all(|b| self.get(dim, b) == 0) {
            dim -= 1;
        }
        let mut out = Jdm::zeros(dim);
        for a in 1..=dim {
            for b in 1..=dim {
                out.entries[(a - 1) * dim + (b - 1)] = self.get(a, b);
            }
        }
        out
    }
}

impl fmt::Display for Jdm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.dim)?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Degree classes of a JDM together with the global node numbering.
///
/// Nodes are numbered `0..N` grouped by class. Classes are ordered by
/// descending size, ties by descending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeClassPartition {
    /// `class_size[α]` = |V_α|; index 0 is unused.
    class_size: Vec<usize>,
    /// Non-empty class degrees in node order.
    class_order: Vec<usize>,
    /// First node of each class, indexed by degree.
    class_start: Vec<usize>,
    node_degree: Vec<usize>,
    total_edges: usize,
}

impl DegreeClassPartition {
    pub fn class_size(&self, alpha: usize) -> usize {
        self.class_size.get(alpha).copied().unwrap_or(0)
    }

    /// Non-empty class degrees in node order.
    pub fn class_order(&self) -> &[usize] {
        &self.class_order
    }

    /// Non-empty class degrees in ascending order.
    pub fn degrees_ascending(&self) -> Vec<usize> {
        (1..self.class_size.len())
            .filter(|&a| self.class_size[a] > 0)
            .collect()
    }

    pub fn nodes_of(&self, alpha: usize) -> Range<usize> {
        let size = self.class_size(alpha);
        if size == 0 {
            return 0..0;
        }
        let start = self.class_start[alpha];
        start..start + size
    }

    pub fn degree_of(&self, node: usize) -> usize {
        self.node_degree[node]
    }

    pub fn node_degrees(&self) -> &[usize] {
        &self.node_degree
    }

    pub fn total_nodes(&self) -> usize {
        self.node_degree.len()
    }

    pub fn total_edges(&self) -> usize {
        self.total_edges
    }

    pub fn max_degree(&self) -> usize {
        self.class_size.len().saturating_sub(1)
    }
}

/// Class sizes |V_α| = (J_{αα} + Σ_β J_{αβ}) / α and the node numbering.
pub fn degree_classes(j: &Jdm) -> Result<DegreeClassPartition> {
    let dim = j.dim();
    let mut class_size = vec![0; dim + 1];
    for (alpha, size) in class_size.iter_mut().enumerate().skip(1) {
        let stubs: usize = j.get(alpha, alpha) + (1..=dim).map(|b| j.get(alpha, b)).sum::<usize>();
        if !stubs.is_multiple_of(alpha) {
            return Err(Error::NonIntegerClassSize(alpha));
        }
        *size = stubs / alpha;
    }
    let mut class_order: Vec<usize> = (1..=dim).filter(|&a| class_size[a] > 0).collect();
    class_order.sort_by(|&a, &b| class_size[b].cmp(&class_size[a]).then(b.cmp(&a)));

    let mut class_start = vec![0; dim + 1];
    let mut node_degree = Vec::new();
    for &alpha in &class_order {
        class_start[alpha] = node_degree.len();
        node_degree.extend(std::iter::repeat_n(alpha, class_size[alpha]));
    }
    Ok(DegreeClassPartition {
        class_size,
        class_order,
        class_start,
        node_degree,
        total_edges: j.edge_count(),
    })
}

/// Degree sequence kept in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(mut degrees: Vec<usize>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        DegreeSequence(degrees)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Bi-degree sequence of `(in_degree, out_degree)` pairs, kept in
/// lexicographically non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BiDegreeSequence(Vec<(usize, usize)>);

impl BiDegreeSequence {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        sort_lexicographic(&mut pairs);
        BiDegreeSequence(pairs)
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// In-degree descending, out-degree descending among ties.
pub(crate) fn sort_lexicographic(pairs: &mut [(usize, usize)]) {
    pairs.sort_unstable_by(|a, b| b.cmp(a));
}

/// Simple undirected graph on nodes `0..n`; edges stored as `(u, v)`, `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LabeledGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl LabeledGraph {
    pub fn new(n: usize) -> Self {
        LabeledGraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = LabeledGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds the undirected edge `{u, v}`, rejecting loops and duplicates.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let reason = if u == v {
            Some("self-loop")
        } else if u >= self.n || v >= self.n {
            Some("node index out of range")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidEdge {
                u,
                v,
                reason: reason.into(),
            });
        }
        if !self.edges.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidEdge {
                u,
                v,
                reason: "duplicate edge".into(),
            });
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }
}

/// One constructed graph with its importance weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub sample_id: u64,
    pub spectra_id: u64,
    /// ln w: spectra log-weight plus all subgraph log-weights.
    pub log_weight: f64,
    /// ln of the spectra-matrix weight alone.
    pub spectra_log_weight: f64,
    pub graph: LabeledGraph,
}

/// First violated constraint found by [`check_realization`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealizationViolation {
    NodeCountMismatch { expected: usize, actual: usize },
    DegreeMismatch { node: usize, expected: usize, actual: usize },
    ClassSizeMismatch { degree: usize, expected: usize, actual: usize },
    PairCountMismatch { alpha: usize, beta: usize, expected: usize, actual: usize },
    NotGraphical,
}

/// Label-agnostic check: the degree histogram of `g` (ignoring isolated
/// nodes) matches the class sizes of `j` and every class pair carries
/// J_{αβ} edges. `LabeledGraph` cannot hold loops or multi-edges, so
/// simplicity holds by construction.
pub fn check_realization(g: &LabeledGraph, j: &Jdm) -> std::result::Result<(), RealizationViolation> {
    let part = degree_classes(j).map_err(|_| RealizationViolation::NotGraphical)?;
    let deg = g.degrees();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in deg.iter().filter(|&&d| d > 0) {
        *hist.entry(d).or_default() += 1;
    }
    for alpha in 1..=j.dim().max(hist.keys().next_back().copied().unwrap_or(0)) {
        let actual = hist.get(&alpha).copied().unwrap_or(0);
        let expected = part.class_size(alpha);
        if actual != expected {
            return Err(RealizationViolation::ClassSizeMismatch {
                degree: alpha,
                expected,
                actual,
            });
        }
    }
    check_pair_counts(g, &deg, j)
}

/// Strict check used for sampler output: node `i` must have the degree the
/// partition assigns to it, on top of [`check_realization`].
pub fn check_labeled_realization(
    g: &LabeledGraph,
    j: &Jdm,
    part: &DegreeClassPartition,
) -> std::result::Result<(), RealizationViolation> {
    if g.node_count() != part.total_nodes() {
        return Err(RealizationViolation::NodeCountMismatch {
            expected: part.total_nodes(),
            actual: g.node_count(),
        });
    }
    let deg = g.degrees();
    for (node, (&actual, &expected)) in deg.iter().zip(part.node_degrees()).enumerate() {
        if actual != expected {
            return Err(RealizationViolation::DegreeMismatch {
                node,
                expected,
                actual,
            });
        }
    }
    check_pair_counts(g, &deg, j)
}

fn check_pair_counts(
    g: &LabeledGraph,
    deg: &[usize],
    j: &Jdm,
) -> std::result::Result<(), RealizationViolation> {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (u, v) in g.edges() {
        let (a, b) = (deg[u].min(deg[v]), deg[u].max(deg[v]));
        *counts.entry((a, b)).or_default() += 1;
    }
    for alpha in 1..=j.dim() {
        for beta in alpha..=j.dim() {
            let actual = counts.remove(&(alpha, beta)).unwrap_or(0);
            let expected = j.get(alpha, beta);
            if actual != expected {
                return Err(RealizationViolation::PairCountMismatch {
                    alpha,
                    beta,
                    expected,
                    actual,
                });
            }
        }
    }
    if let Some((&(alpha, beta), &actual)) = counts.iter().next() {
        return Err(RealizationViolation::PairCountMismatch {
            alpha,
            beta,
            expected: 0,
            actual,
        });
    }
    Ok(())
}

pub fn validate_realization(g: &LabeledGraph, j: &Jdm) -> bool {
    check_realization(g, j).is_ok()
}

/// Joint-degree matrix of a simple graph. Isolated nodes are ignored.
pub fn extract_jdm(g: &LabeledGraph) -> Jdm {
    let deg = g.degrees();
    let dim = deg.iter().copied().max().unwrap_or(0);
    let mut j = Jdm::zeros(dim);
    for (u, v) in g.edges() {
        let (a, b) = (deg[u], deg[v]);
        let cur = j.get(a, b);
        j.set(a, b, cur + 1);
    }
    j
}
