//! Node-by-node sampling of degree-spectra matrices.
//!
//! Column `i` of a spectra matrix says how many neighbors node `i` has in
//! each degree class. Nodes are visited in index order and, within a node,
//! classes in ascending degree. For every cell the sampler computes the
//! range of values that keeps the affected class-pair subgraph realizable
//! and the node's remaining stubs placeable, then draws uniformly from it.

use std::fmt;

use crate::error::{Error, Result};
use crate::graphicality::{directed_sorted, eg_sorted, jdm_is_graphical};
use crate::model::{degree_classes, DegreeClassPartition, Jdm, LabeledGraph};
use crate::rng::{Chooser, RngChooser};

/// Δ×N matrix; `get(α, i)` is the number of neighbors of node `i` in class
/// V_α.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpectraMatrix {
    dim: usize,
    n: usize,
    entries: Vec<usize>,
}

impl SpectraMatrix {
    pub fn zeros(dim: usize, n: usize) -> Self {
        SpectraMatrix {
            dim,
            n,
            entries: vec![0; dim * n],
        }
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let dim = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(dim * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("row has {} entries, expected {n}", row.len()),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(SpectraMatrix { dim, n, entries })
    }

    /// Spectra of `g` under the partition's node labels.
    pub fn of_graph(g: &LabeledGraph, part: &DegreeClassPartition) -> Result<Self> {
        if g.node_count() != part.total_nodes() {
            return Err(Error::InconsistentSpectra(format!(
                "graph has {} nodes, partition has {}",
                g.node_count(),
                part.total_nodes()
            )));
        }
        let mut s = SpectraMatrix::zeros(part.max_degree(), part.total_nodes());
        for (u, v) in g.edges() {
            let (du, dv) = (part.degree_of(u), part.degree_of(v));
            if du > s.dim || dv > s.dim {
                return Err(Error::InconsistentSpectra(format!("edge ({u}, {v}) leaves the classes")));
            }
            s.entries[(dv - 1) * s.n + u] += 1;
            s.entries[(du - 1) * s.n + v] += 1;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, alpha: usize, node: usize) -> usize {
        self.entries[(alpha - 1) * self.n + node]
    }

    #[inline]
    fn set(&mut self, alpha: usize, node: usize, value: usize) {
        self.entries[(alpha - 1) * self.n + node] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.dim).map(move |a| &self.entries[a * self.n..(a + 1) * self.n])
    }

    /// Checks column sums against node degrees and class-pair sums against
    /// the JDM (twice the entry on the diagonal).
    pub fn check_consistency(&self, j: &Jdm, part: &DegreeClassPartition) -> Result<()> {
        if self.n != part.total_nodes() || self.dim < part.max_degree() {
            return Err(Error::InconsistentSpectra(format!(
                "matrix is {}x{}, expected {}x{}",
                self.dim,
                self.n,
                part.max_degree(),
                part.total_nodes()
            )));
        }
        for node in 0..self.n {
            let sum: usize = (1..=self.dim).map(|a| self.get(a, node)).sum();
            if sum != part.degree_of(node) {
                return Err(Error::InconsistentSpectra(format!(
                    "column {node} sums to {sum}, node degree is {}",
                    part.degree_of(node)
                )));
            }
        }
        for alpha in 1..=self.dim {
            for beta in 1..=self.dim {
                let sum: usize = part.nodes_of(alpha).map(|i| self.get(beta, i)).sum();
                let expected = if alpha == beta { 2 * j.get(alpha, alpha) } else { j.get(alpha, beta) };
                if sum != expected {
                    return Err(Error::InconsistentSpectra(format!(
                        "class {alpha} holds {sum} stubs towards class {beta}, expected {expected}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SpectraMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.dim, self.n)?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Graphicality bounds `[m, M]` for one cell and the final range `[r, R]`
/// after the node's stub budget is taken into account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub m: usize,
    pub big_m: usize,
    pub r: usize,
    pub big_r: usize,
}

/// One drawn cell. `low == high` marks a forced value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub node: usize,
    pub class: usize,
    pub low: usize,
    pub high: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpectra {
    pub matrix: SpectraMatrix,
    /// Σ ln(R - r + 1) over all decisions.
    pub log_weight: f64,
    pub decisions: Vec<Decision>,
}

/// Partially filled spectra matrix plus the bookkeeping the bound search
/// needs. Cells towards classes the node has no edges to are fixed at zero
/// from the start.
#[derive(Debug, Clone)]
pub struct SpectraBuildState<'a> {
    jdm: &'a Jdm,
    part: &'a DegreeClassPartition,
    matrix: SpectraMatrix,
    is_set: Vec<bool>,
    /// `allocated[α·w + β]` = Σ of set S_{β,i} over i ∈ V_α.
    allocated: Vec<usize>,
    /// `unset[α·w + β]` = number of i ∈ V_α with S_{β,i} unset.
    unset: Vec<usize>,
    residual_stubs: Vec<usize>,
    width: usize,
    scratch: Scratch,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    fixed_own: Vec<usize>,
    fixed_other: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    seq: Vec<usize>,
}

/// Fixed data of one cell's subgraph, gathered once and reused for every
/// candidate value.
struct CellProblem {
    within: bool,
    /// ε for a bipartite pair, 2J_{αα} within a class.
    total: usize,
    own_fixed_sum: usize,
    own_free: usize,
    other_fixed_sum: usize,
    other_free: usize,
    cap: usize,
}

impl<'a> SpectraBuildState<'a> {
    pub fn new(jdm: &'a Jdm, part: &'a DegreeClassPartition) -> Self {
        let dim = part.max_degree();
        let n = part.total_nodes();
        let width = dim + 1;
        let mut is_set = vec![false; dim * n];
        let mut unset = vec![0; width * width];
        for node in 0..n {
            let alpha = part.degree_of(node);
            for beta in 1..=dim {
                if jdm.get(alpha, beta) == 0 {
                    is_set[(beta - 1) * n + node] = true;
                } else {
                    unset[alpha * width + beta] += 1;
                }
            }
        }
        SpectraBuildState {
            jdm,
            part,
            matrix: SpectraMatrix::zeros(dim, n),
            is_set,
            allocated: vec![0; width * width],
            unset,
            residual_stubs: part.node_degrees().to_vec(),
            width,
            scratch: Scratch::default(),
        }
    }

    pub fn matrix(&self) -> &SpectraMatrix {
        &self.matrix
    }

    pub fn partition(&self) -> &DegreeClassPartition {
        self.part
    }

    pub fn residual_stubs(&self, node: usize) -> usize {
        self.residual_stubs[node]
    }

    pub fn is_set(&self, node: usize, beta: usize) -> bool {
        self.is_set[(beta - 1) * self.matrix.n + node]
    }

    /// Remaining edges of J_{αβ} not yet allocated on the V_α side
    /// (stubs of 2J_{αα} within a class).
    pub fn residual_budget(&self, alpha: usize, beta: usize) -> usize {
        let total = if alpha == beta { 2 * self.jdm.get(alpha, alpha) } else { self.jdm.get(alpha, beta) };
        total - self.allocated[alpha * self.width + beta]
    }

    /// Classes that node `node` has cells to fill for, ascending.
    pub fn classes_of(&self, node: usize) -> Vec<usize> {
        let alpha = self.part.degree_of(node);
        (1..=self.matrix.dim)
            .filter(|&b| self.jdm.get(alpha, b) > 0)
            .collect()
    }

    /// Fixes S_{β,node} = value. The caller guarantees feasibility.
    pub fn set(&mut self, node: usize, beta: usize, value: usize) {
        let idx = (beta - 1) * self.matrix.n + node;
        assert!(!self.is_set[idx], "cell ({beta}, {node}) set twice");
        let alpha = self.part.degree_of(node);
        self.is_set[idx] = true;
        self.matrix.set(beta, node, value);
        self.allocated[alpha * self.width + beta] += value;
        self.unset[alpha * self.width + beta] -= 1;
        self.residual_stubs[node] -= value;
    }

    fn cell_problem(&mut self, node: usize, beta: usize) -> CellProblem {
        let alpha = self.part.degree_of(node);
        let n = self.matrix.n;
        let Scratch {
            fixed_own,
            fixed_other,
            ..
        } = &mut self.scratch;
        fixed_own.clear();
        fixed_other.clear();
        for x in self.part.nodes_of(alpha) {
            if self.is_set[(beta - 1) * n + x] {
                fixed_own.push(self.matrix.get(beta, x));
            }
        }
        let w = self.width;
        if alpha == beta {
            let own_free = self.unset[alpha * w + alpha] - 1;
            CellProblem {
                within: true,
                total: 2 * self.jdm.get(alpha, alpha),
                own_fixed_sum: self.allocated[alpha * w + alpha],
                own_free,
                other_fixed_sum: 0,
                other_free: 0,
                cap: self.part.class_size(alpha) - 1,
            }
        } else {
            for y in self.part.nodes_of(beta) {
                if self.is_set[(alpha - 1) * n + y] {
                    fixed_other.push(self.matrix.get(alpha, y));
                }
            }
            CellProblem {
                within: false,
                total: self.jdm.get(alpha, beta),
                own_fixed_sum: self.allocated[alpha * w + beta],
                own_free: self.unset[alpha * w + beta] - 1,
                other_fixed_sum: self.allocated[beta * w + alpha],
                other_free: self.unset[beta * w + alpha],
                cap: self.part.class_size(beta),
            }
        }
    }

    /// Tentatively fixes the cell at `value`, completes the subgraph
    /// balanced and tests it. Only scratch buffers are touched.
    fn value_is_feasible(&mut self, cell: &CellProblem, value: usize) -> bool {
        let own_sum = cell.own_fixed_sum + value;
        if own_sum > cell.total {
            return false;
        }
        let Some(own_share) = share(cell.total - own_sum, cell.own_free) else {
            return false;
        };
        let Scratch {
            fixed_own,
            fixed_other,
            pairs,
            seq,
        } = &mut self.scratch;
        if cell.within {
            seq.clear();
            seq.extend_from_slice(fixed_own);
            seq.push(value);
            seq.extend(own_share);
            seq.sort_unstable_by(|a, b| b.cmp(a));
            return eg_sorted(seq);
        }
        if cell.other_fixed_sum > cell.total {
            return false;
        }
        let Some(other_share) = share(cell.total - cell.other_fixed_sum, cell.other_free) else {
            return false;
        };
        pairs.clear();
        pairs.extend(fixed_own.iter().map(|&d| (0, d)));
        pairs.push((0, value));
        pairs.extend(own_share.map(|d| (0, d)));
        pairs.extend(fixed_other.iter().map(|&d| (d, 0)));
        pairs.extend(other_share.map(|d| (d, 0)));
        pairs.sort_unstable_by(|a, b| b.cmp(a));
        directed_sorted(pairs)
    }

    /// `[m, M]` ignoring the node's residual stubs. Feasible values form an
    /// interval, so `m` comes from an ascending scan and `M` from bisection.
    fn unclamped_bounds(&mut self, node: usize, beta: usize) -> Result<(usize, usize)> {
        let cell = self.cell_problem(node, beta);
        let max = cell
            .cap
            .min(cell.total.saturating_sub(cell.own_fixed_sum))
            .min(self.part.degree_of(node));
        let mut m = None;
        for v in 0..=max {
            if self.value_is_feasible(&cell, v) {
                m = Some(v);
                break;
            }
        }
        let Some(m) = m else {
            return Err(Error::NoFeasibleValue { node, class: beta });
        };
        // invariant: lo feasible, everything above hi infeasible
        let (mut lo, mut hi) = (m, max);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.value_is_feasible(&cell, mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok((m, lo))
    }
}

/// Balanced split of `rest` stubs over `free` slots, or `None` when there
/// are stubs but no slots.
fn share(rest: usize, free: usize) -> Option<impl Iterator<Item = usize>> {
    if free == 0 && rest > 0 {
        return None;
    }
    let (base, extra) = (rest.checked_div(free).unwrap_or(0), rest.checked_rem(free).unwrap_or(0));
    Some((0..free).map(move |i| base + usize::from(i < extra)))
}

/// Minimum and maximum values of S_{β,node} that keep the (class of node,
/// β) subgraph realizable, capped by the node's residual stubs.
pub fn class_bounds(state: &mut SpectraBuildState<'_>, node: usize, beta: usize) -> Result<(usize, usize)> {
    if state.is_set(node, beta) {
        return Err(Error::Internal(format!("cell ({beta}, {node}) is already set")));
    }
    let (m, big_m) = state.unclamped_bounds(node, beta)?;
    let l = state.residual_stubs(node);
    if m > l {
        return Err(Error::NoFeasibleValue { node, class: beta });
    }
    Ok((m, big_m.min(l)))
}

/// Combines the bounds of cell `beta` with those of the node's other unset
/// classes: `r = max(m_β, l - T)`, `R = min(M_β, l - t)` where `t` and `T`
/// sum the other classes' minima and maxima.
pub fn feasible_range(
    state: &SpectraBuildState<'_>,
    node: usize,
    beta: usize,
    all_bounds: &[(usize, usize, usize)],
) -> Result<Bounds> {
    let l = state.residual_stubs(node) as i64;
    let (mut t, mut big_t) = (0i64, 0i64);
    let mut own = None;
    for &(b, m, big_m) in all_bounds {
        if b == beta {
            own = Some((m, big_m));
        } else if !state.is_set(node, b) {
            t += m as i64;
            big_t += big_m as i64;
        }
    }
    let (m, big_m) = own.ok_or_else(|| Error::Internal(format!("no bounds for class {beta}")))?;
    let r = (m as i64).max(l - big_t);
    let big_r = (big_m as i64).min(l - t);
    if r > big_r || r < 0 {
        return Err(Error::EmptyRange {
            node,
            class: beta,
            low: r,
            high: big_r,
        });
    }
    Ok(Bounds {
        m,
        big_m,
        r: r as usize,
        big_r: big_r as usize,
    })
}

pub fn sample_spectra<R: rand::Rng + ?Sized>(j: &Jdm, rng: &mut R) -> Result<(SpectraMatrix, f64)> {
    let part = degree_classes(j)?;
    let s = sample_spectra_with(j, &part, &mut RngChooser(rng))?;
    Ok((s.matrix, s.log_weight))
}

/// Draws one spectra matrix. Every cell value comes from its feasible range
/// `[r, R]`, so the build never backtracks; the log-weight is the log of
/// the inverse path probability.
pub fn sample_spectra_with(
    j: &Jdm,
    part: &DegreeClassPartition,
    chooser: &mut dyn Chooser,
) -> Result<SampledSpectra> {
    if !jdm_is_graphical(j) {
        return Err(Error::NotGraphical("joint-degree matrix fails the realizability conditions".into()));
    }
    let mut state = SpectraBuildState::new(j, part);
    let mut decisions = Vec::new();
    let mut log_weight = 0.0;
    let mut bounds: Vec<(usize, usize, usize)> = Vec::new();
    for node in 0..part.total_nodes() {
        let classes = state.classes_of(node);
        // Each cell lives in its own class-pair subgraph, so fixing one of
        // the node's cells leaves the bounds of the others unchanged; only
        // the cap by the residual stubs moves.
        bounds.clear();
        if classes.len() > 1 {
            for &beta in &classes {
                let (m, big_m) = state.unclamped_bounds(node, beta)?;
                bounds.push((beta, m, big_m));
            }
        }
        for (idx, &beta) in classes.iter().enumerate() {
            let l = state.residual_stubs(node);
            let (low, high) = if l == 0 {
                (0, 0)
            } else if classes.len() == 1 {
                (l, l)
            } else {
                let clamped: Vec<(usize, usize, usize)> = bounds[idx..]
                    .iter()
                    .map(|&(b, m, big_m)| (b, m, big_m.min(l)))
                    .collect();
                let range = feasible_range(&state, node, beta, &clamped)?;
                (range.r, range.big_r)
            };
            let value = if high > low {
                log_weight += ((high - low + 1) as f64).ln();
                low + chooser.choose(high - low + 1)
            } else {
                low
            };
            decisions.push(Decision {
                node,
                class: beta,
                low,
                high,
                value,
            });
            state.set(node, beta, value);
        }
    }
    let matrix = state.matrix;
    if cfg!(debug_assertions) {
        matrix.check_consistency(j, part)?;
    }
    Ok(SampledSpectra {
        matrix,
        log_weight,
        decisions,
    })
}

/// Replays `decisions` on a fresh state and returns the range each cell
/// would be drawn from, recomputing every bound from scratch.
pub fn replay_ranges(j: &Jdm, part: &DegreeClassPartition, decisions: &[Decision]) -> Result<Vec<(usize, usize)>> {
    let mut state = SpectraBuildState::new(j, part);
    let mut out = Vec::with_capacity(decisions.len());
    for d in decisions {
        let mut all = Vec::new();
        for beta in state.classes_of(d.node) {
            if !state.is_set(d.node, beta) {
                let (m, big_m) = class_bounds(&mut state, d.node, beta)?;
                all.push((beta, m, big_m));
            }
        }
        let range = feasible_range(&state, d.node, d.class, &all)?;
        out.push((range.r, range.big_r));
        state.set(d.node, d.class, d.value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rng::{derive_stream, StreamDomain};

    #[test]
    fn first_cells_of_six_node_jdm() {
        let j = fixtures::six_node_jdm();
        let part = degree_classes(&j).unwrap();
        let mut state = SpectraBuildState::new(&j, &part);
        assert_eq!(class_bounds(&mut state, 0, 2).unwrap(), (0, 2));
        assert_eq!(class_bounds(&mut state, 0, 3).unwrap(), (0, 2));
        let all = [(2, 0, 2), (3, 0, 2)];
        let b = feasible_range(&state, 0, 2, &all).unwrap();
        assert_eq!((b.r, b.big_r), (0, 2));

        state.set(0, 2, 1);
        let (m, big_m) = class_bounds(&mut state, 0, 3).unwrap();
        let b = feasible_range(&state, 0, 3, &[(3, m, big_m)]).unwrap();
        assert_eq!((b.r, b.big_r), (1, 1));
    }

    #[test]
    fn empty_pair_has_zero_bounds() {
        let j = fixtures::ten_node_jdm();
        let part = degree_classes(&j).unwrap();
        let state = SpectraBuildState::new(&j, &part);
        // degree-2 nodes have no degree-2 or degree-1 neighbors
        let node = part.nodes_of(2).start;
        assert!(state.is_set(node, 1) && state.is_set(node, 2));
        assert_eq!(state.matrix().get(2, node), 0);
        assert_eq!(state.classes_of(node), vec![3, 4]);
    }

    #[test]
    fn regular_jdm_has_a_single_spectra() {
        let mut j = Jdm::zeros(2);
        j.set(2, 2, 5);
        let mut r = derive_stream(3, StreamDomain::Spectra, 0);
        let (s, lw) = sample_spectra(&j, &mut r).unwrap();
        assert_eq!(lw, 0.0);
        assert!(s.rows().nth(1).unwrap().iter().all(|&x| x == 2));
    }

    #[test]
    fn sampled_matrices_are_consistent_and_weights_replay() {
        for j in [fixtures::six_node_jdm(), fixtures::ten_node_jdm()] {
            let part = degree_classes(&j).unwrap();
            for id in 0..200 {
                let mut r = derive_stream(11, StreamDomain::Spectra, id);
                let s = sample_spectra_with(&j, &part, &mut RngChooser(&mut r)).unwrap();
                s.matrix.check_consistency(&j, &part).unwrap();
                let replayed = replay_ranges(&j, &part, &s.decisions).unwrap();
                let mut lw = 0.0;
                for (d, &(lo, hi)) in s.decisions.iter().zip(&replayed) {
                    assert_eq!((d.low, d.high), (lo, hi));
                    assert!(lo <= d.value && d.value <= hi);
                    lw += ((hi - lo + 1) as f64).ln();
                }
                assert!((lw - s.log_weight).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let j = fixtures::ten_node_jdm();
        let a = sample_spectra(&j, &mut derive_stream(5, StreamDomain::Spectra, 9)).unwrap();
        let b = sample_spectra(&j, &mut derive_stream(5, StreamDomain::Spectra, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_graphical() {
        let mut j = Jdm::zeros(2);
        j.set(2, 2, 1);
        let mut r = derive_stream(0, StreamDomain::Spectra, 0);
        assert!(matches!(sample_spectra(&j, &mut r), Err(Error::NotGraphical(_))));
    }

    #[test]
    fn spectra_of_bowtie() {
        let j = fixtures::six_node_jdm();
        let part = degree_classes(&j).unwrap();
        let s = SpectraMatrix::of_graph(&fixtures::bowtie_graph(), &part).unwrap();
        assert_eq!(s, fixtures::hexagon_bowtie_spectra());
        s.check_consistency(&j, &part).unwrap();
    }
}
