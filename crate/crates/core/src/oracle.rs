//! Brute-force ground truth for small instances.
//!
//! The graphicality references here share no code with
//! [`crate::graphicality`]: undirected sequences are reduced by
//! Havel-Hakimi, directed and bipartite ones are realized by exhaustive
//! backtracking. The exact sampler walk is the exception by design: it
//! drives the production samplers through every branch so that what it
//! certifies is the code that actually runs.

use std::collections::{BTreeMap, BTreeSet};

use crate::assembler::sample_jdm_graph_with;
use crate::error::{Error, Result};
use crate::model::{degree_classes, DegreeClassPartition, Jdm, LabeledGraph};
use crate::rng::Chooser;
use crate::spectra::{sample_spectra_with, SpectraMatrix};

/// Default node-count guard for the enumerations.
pub const DEFAULT_LIMIT_N: usize = 10;
/// Node-count guard for exhaustive directed realizability.
pub const DIRECTED_LIMIT_N: usize = 5;

/// Havel-Hakimi reduction: repeatedly link the largest degree to the next
/// largest ones.
pub fn havel_hakimi(d: &[usize]) -> bool {
    let mut d: Vec<usize> = d.iter().copied().filter(|&x| x > 0).collect();
    loop {
        d.sort_unstable_by(|a, b| b.cmp(a));
        while d.last() == Some(&0) {
            d.pop();
        }
        let Some((&first, rest)) = d.split_first() else {
            return true;
        };
        if first > rest.len() {
            return false;
        }
        let mut next = rest.to_vec();
        for x in next.iter_mut().take(first) {
            if *x == 0 {
                return false;
            }
            *x -= 1;
        }
        d = next;
    }
}

pub fn reference_graphicality(d: &[usize]) -> bool {
    havel_hakimi(d)
}

/// Exhaustive search for a simple directed graph with the given `(in, out)`
/// degrees, guarded to `N <= 5`.
pub fn reference_directed_graphicality(d: &[(usize, usize)]) -> Result<bool> {
    if d.len() > DIRECTED_LIMIT_N {
        return Err(Error::TooLarge(format!(
            "{} nodes exceed the exhaustive directed limit of {DIRECTED_LIMIT_N}",
            d.len()
        )));
    }
    Ok(directed_realizable_with(d, |_, _| false))
}

/// Backtracking over out-neighbor sets, node by node. Arcs for which
/// `blocked(from, to)` holds are never used.
pub fn directed_realizable_with(d: &[(usize, usize)], blocked: impl Fn(usize, usize) -> bool) -> bool {
    let sum_in: usize = d.iter().map(|p| p.0).sum();
    let sum_out: usize = d.iter().map(|p| p.1).sum();
    if sum_in != sum_out {
        return false;
    }
    let mut cap: Vec<usize> = d.iter().map(|p| p.0).collect();
    let outs: Vec<usize> = d.iter().map(|p| p.1).collect();
    fn place(
        node: usize,
        from: usize,
        left: usize,
        outs: &[usize],
        cap: &mut [usize],
        blocked: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if node == outs.len() {
            return cap.iter().all(|&c| c == 0);
        }
        if left == 0 {
            let next = node + 1;
            return place(next, 0, outs.get(next).copied().unwrap_or(0), outs, cap, blocked);
        }
        for to in from..cap.len() {
            if to == node || cap[to] == 0 || blocked(node, to) {
                continue;
            }
            cap[to] -= 1;
            let ok = place(node, to + 1, left - 1, outs, cap, blocked);
            cap[to] += 1;
            if ok {
                return true;
            }
        }
        false
    }
    place(0, 0, outs.first().copied().unwrap_or(0), &outs, &mut cap, &blocked)
}

/// Exhaustive search for a bipartite graph with side degrees `u` and `v`.
pub fn bipartite_realizable(u: &[usize], v: &[usize]) -> bool {
    let pairs: Vec<(usize, usize)> = u.iter().map(|&d| (0, d)).chain(v.iter().map(|&d| (d, 0))).collect();
    let split = u.len();
    directed_realizable_with(&pairs, |from, to| from >= split || to < split)
}

/// Every way to split `total` over `slots` values, each at most `cap`.
fn compositions(total: usize, slots: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(slots);
    fn rec(left: usize, slots: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == slots {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 0..=left.min(cap) {
            cur.push(x);
            rec(left - x, slots, cap, cur, out);
            cur.pop();
        }
    }
    rec(total, slots, cap, &mut cur, &mut out);
    out
}

/// Whether any assignment of free degrees, balanced or not, completes the
/// triplet to a realizable bipartite sequence.
pub fn triplet_realizable_exhaustive(p: &[usize], q: &[usize], eps: usize, size_b: usize, size_k: usize) -> bool {
    let (sp, sq): (usize, usize) = (p.iter().sum(), q.iter().sum());
    if sp > eps || sq > eps {
        return false;
    }
    let (nu, nv) = (p.len() + size_b, q.len() + size_k);
    let free_u = compositions(eps - sp, size_b, nv);
    let free_v = compositions(eps - sq, size_k, nu);
    free_u.iter().any(|fu| {
        let u: Vec<usize> = p.iter().chain(fu).copied().collect();
        free_v.iter().any(|fv| {
            let v: Vec<usize> = q.iter().chain(fv).copied().collect();
            bipartite_realizable(&u, &v)
        })
    })
}

/// Feasible values of one free U-side node over all realizations.
pub fn free_degree_values(p: &[usize], q: &[usize], eps: usize, size_b: usize, size_k: usize) -> BTreeSet<usize> {
    (0..=eps)
        .filter(|&g| {
            let mut fixed = p.to_vec();
            fixed.push(g);
            size_b >= 1 && triplet_realizable_exhaustive(&fixed, q, eps, size_b - 1, size_k)
        })
        .collect()
}

/// All labeled realizations of a JDM on the partition's node layout,
/// grouped into isomorphism classes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationCatalog {
    pub labeled_graphs: Vec<LabeledGraph>,
    pub iso_classes: Vec<IsoClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoClass {
    /// Lexicographically smallest relabeling of any member.
    pub canonical: LabeledGraph,
    /// Indices into `labeled_graphs`.
    pub members: Vec<usize>,
}

impl RealizationCatalog {
    /// Structured text: one block per class with its labeled count and
    /// canonical edge list.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# labeled_graphs {}\n# isomorphism_classes {}\n",
            self.labeled_graphs.len(),
            self.iso_classes.len()
        );
        for (i, c) in self.iso_classes.iter().enumerate() {
            out += &format!("class {i} labeled {}\n", c.members.len());
            for (u, v) in c.canonical.edges() {
                out += &format!("{u} {v}\n");
            }
        }
        out
    }
}

fn guard(part: &DegreeClassPartition, limit_n: usize) -> Result<()> {
    if part.total_nodes() > limit_n {
        return Err(Error::TooLarge(format!(
            "{} nodes exceed the enumeration limit of {limit_n}",
            part.total_nodes()
        )));
    }
    Ok(())
}

/// Backtracks over node pairs in order, keeping residual degrees and
/// class-pair budgets non-negative.
pub fn enumerate_realizations(j: &Jdm, limit_n: usize) -> Result<RealizationCatalog> {
    let part = degree_classes(j)?;
    guard(&part, limit_n)?;
    let n = part.total_nodes();
    let deg = part.node_degrees().to_vec();
    let mut budget = vec![vec![0usize; j.dim() + 1]; j.dim() + 1];
    for (a, row) in budget.iter_mut().enumerate().skip(1) {
        for (b, x) in row.iter_mut().enumerate().skip(1) {
            *x = j.get(a, b);
        }
    }
    struct Search<'a> {
        n: usize,
        deg: &'a [usize],
        residual: Vec<usize>,
        budget: Vec<Vec<usize>>,
        edges: Vec<(usize, usize)>,
        found: Vec<LabeledGraph>,
    }
    impl Search<'_> {
        fn run(&mut self, u: usize, v: usize) {
            if u == self.n {
                if self.budget.iter().flatten().all(|&x| x == 0) {
                    let g = LabeledGraph::from_edges(self.n, self.edges.iter().copied()).expect("simple");
                    self.found.push(g);
                }
                return;
            }
            if v == self.n {
                if self.residual[u] == 0 {
                    self.run(u + 1, u + 2);
                }
                return;
            }
            if self.residual[u] > self.n - v {
                return;
            }
            let (a, b) = (self.deg[u], self.deg[v]);
            if self.residual[u] > 0 && self.residual[v] > 0 && self.budget[a][b] > 0 {
                self.residual[u] -= 1;
                self.residual[v] -= 1;
                self.budget[a][b] -= 1;
                if a != b {
                    self.budget[b][a] -= 1;
                }
                self.edges.push((u, v));
                self.run(u, v + 1);
                self.edges.pop();
                self.residual[u] += 1;
                self.residual[v] += 1;
                self.budget[a][b] += 1;
                if a != b {
                    self.budget[b][a] += 1;
                }
            }
            self.run(u, v + 1);
        }
    }
    let mut search = Search {
        n,
        deg: &deg,
        residual: deg.clone(),
        budget,
        edges: Vec::new(),
        found: Vec::new(),
    };
    if n > 0 {
        search.run(0, 1);
    }
    let labeled_graphs = search.found;

    let perms = class_permutations(&part);
    let mut by_form: BTreeMap<Vec<(usize, usize)>, Vec<usize>> = BTreeMap::new();
    for (idx, g) in labeled_graphs.iter().enumerate() {
        by_form.entry(canonical_form(g, &perms)).or_default().push(idx);
    }
    let iso_classes = by_form
        .into_iter()
        .map(|(form, members)| IsoClass {
            canonical: LabeledGraph::from_edges(n, form).expect("simple"),
            members,
        })
        .collect();
    Ok(RealizationCatalog {
        labeled_graphs,
        iso_classes,
    })
}

/// All relabelings that permute nodes within their degree class.
fn class_permutations(part: &DegreeClassPartition) -> Vec<Vec<usize>> {
    let mut perms = vec![(0..part.total_nodes()).collect::<Vec<_>>()];
    for alpha in part.class_order() {
        let range = part.nodes_of(*alpha);
        let local = permutations(range.clone().collect());
        perms = perms
            .into_iter()
            .flat_map(|p| {
                let range = range.clone();
                local.iter().map(move |lp| {
                    let mut q = p.clone();
                    for (slot, &target) in range.clone().zip(lp) {
                        q[slot] = target;
                    }
                    q
                })
            })
            .collect();
    }
    perms
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in permutations(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn canonical_form(g: &LabeledGraph, perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    perms
        .iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = g
                .edges()
                .map(|(u, v)| (p[u].min(p[v]), p[u].max(p[v])))
                .collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap_or_default()
}

pub fn enumerate_spectra(j: &Jdm) -> Result<Vec<SpectraMatrix>> {
    enumerate_spectra_with_limit(j, DEFAULT_LIMIT_N)
}

/// Every spectra matrix whose column and class-pair sums fit the JDM and
/// whose class-pair subgraphs are all realizable, by plain recursion over
/// cells.
pub fn enumerate_spectra_with_limit(j: &Jdm, limit_n: usize) -> Result<Vec<SpectraMatrix>> {
    let part = degree_classes(j)?;
    guard(&part, limit_n)?;
    let dim = part.max_degree();
    let n = part.total_nodes();
    let classes = part.degrees_ascending();
    let mut rows = vec![vec![0usize; n]; dim];
    // alloc[α][β] = Σ S_{β,i} over i ∈ V_α so far
    let mut alloc = vec![vec![0usize; dim + 1]; dim + 1];
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        node: usize,
        ci: usize,
        left: usize,
        j: &Jdm,
        part: &DegreeClassPartition,
        classes: &[usize],
        rows: &mut Vec<Vec<usize>>,
        alloc: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if node == part.total_nodes() {
            out.push(rows.clone());
            return;
        }
        if ci == classes.len() {
            if left == 0 {
                let next = node + 1;
                let l = if next < part.total_nodes() { part.degree_of(next) } else { 0 };
                rec(next, 0, l, j, part, classes, rows, alloc, out);
            }
            return;
        }
        let alpha = part.degree_of(node);
        let beta = classes[ci];
        let total = if alpha == beta { 2 * j.get(alpha, alpha) } else { j.get(alpha, beta) };
        let cap = if alpha == beta { part.class_size(alpha) - 1 } else { part.class_size(beta) };
        let room = total - alloc[alpha][beta];
        for v in 0..=left.min(room).min(cap) {
            rows[beta - 1][node] = v;
            alloc[alpha][beta] += v;
            rec(node, ci + 1, left - v, j, part, classes, rows, alloc, out);
            alloc[alpha][beta] -= v;
        }
        rows[beta - 1][node] = 0;
    }

    let mut candidates = Vec::new();
    if n > 0 {
        rec(0, 0, part.degree_of(0), j, &part, &classes, &mut rows, &mut alloc, &mut candidates);
    }
    for cand in candidates {
        let s = SpectraMatrix::from_rows(&cand)?;
        if s.check_consistency(j, &part).is_ok() && subgraphs_realizable(j, &s, &part) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Tests every class-pair subgraph of `s` with the reference checks.
pub fn subgraphs_realizable(j: &Jdm, s: &SpectraMatrix, part: &DegreeClassPartition) -> bool {
    let classes = part.degrees_ascending();
    for &a in &classes {
        for &b in classes.iter().filter(|&&b| b >= a) {
            if j.get(a, b) == 0 {
                continue;
            }
            let u: Vec<usize> = part.nodes_of(a).map(|i| s.get(b, i)).collect();
            let ok = if a == b {
                havel_hakimi(&u)
            } else {
                let v: Vec<usize> = part.nodes_of(b).map(|i| s.get(a, i)).collect();
                bipartite_realizable(&u, &v)
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Replays a fixed sequence of choices and extends it with zeros; after a
/// run, [`ScriptedChooser::advance`] steps to the next unexplored branch
/// like an odometer. Single-alternative choices are not recorded.
#[derive(Debug, Clone, Default)]
pub struct ScriptedChooser {
    script: Vec<(usize, usize)>,
    depth: usize,
}

impl Chooser for ScriptedChooser {
    fn choose(&mut self, n: usize) -> usize {
        if n == 1 {
            return 0;
        }
        let pick = if let Some(&(c, arity)) = self.script.get(self.depth) {
            assert_eq!(arity, n, "decision tree changed shape on replay");
            c
        } else {
            self.script.push((0, n));
            0
        };
        self.depth += 1;
        pick
    }
}

impl ScriptedChooser {
    pub fn advance(&mut self) -> bool {
        self.script.truncate(self.depth);
        self.depth = 0;
        while let Some(&(c, arity)) = self.script.last() {
            if c + 1 < arity {
                self.script.last_mut().expect("non-empty").0 += 1;
                return true;
            }
            self.script.pop();
        }
        false
    }

    /// Product of 1/arity over the choices made in the last run.
    pub fn path_probability(&self) -> f64 {
        self.script[..self.depth].iter().map(|&(_, a)| 1.0 / a as f64).product()
    }
}

/// Runs `f` once per leaf of its decision tree and returns each result with
/// its path probability.
pub fn walk_decision_tree<T>(
    max_leaves: usize,
    mut f: impl FnMut(&mut ScriptedChooser) -> Result<T>,
) -> Result<Vec<(T, f64)>> {
    let mut ch = ScriptedChooser::default();
    let mut out = Vec::new();
    loop {
        let t = f(&mut ch)?;
        out.push((t, ch.path_probability()));
        if out.len() > max_leaves {
            return Err(Error::TooLarge(format!("decision tree has more than {max_leaves} leaves")));
        }
        if !ch.advance() {
            return Ok(out);
        }
    }
}

const MAX_LEAVES: usize = 1 << 20;

/// A spectra matrix the sampler can produce, with the probability and
/// log-weight of the path that produces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraLeaf {
    pub matrix: SpectraMatrix,
    pub probability: f64,
    pub log_weight: f64,
}

pub fn spectra_leaves(j: &Jdm) -> Result<Vec<SpectraLeaf>> {
    let part = degree_classes(j)?;
    Ok(walk_decision_tree(MAX_LEAVES, |ch| sample_spectra_with(j, &part, ch))?
        .into_iter()
        .map(|(s, p)| SpectraLeaf {
            matrix: s.matrix,
            probability: p,
            log_weight: s.log_weight,
        })
        .collect())
}

/// Graphs the assembler can build from one spectra matrix, each with its
/// path probability and subgraph log-weight.
pub fn graph_leaves(j: &Jdm, s: &SpectraMatrix) -> Result<Vec<(LabeledGraph, f64, f64)>> {
    let part = degree_classes(j)?;
    Ok(walk_decision_tree(MAX_LEAVES, |ch| sample_jdm_graph_with(j, &part, s, 0.0, ch))?
        .into_iter()
        .map(|((g, lw), p)| (g, p, lw))
        .collect())
}

/// Infinite-sample limits of the three estimators for one observable key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTarget {
    pub weighted: f64,
    pub unweighted: f64,
    pub product_weighted: f64,
}

/// Walks every branch of the spectra sampler and, per spectra matrix, every
/// branch of the graph sampler, and returns the exact expectation of each
/// estimator for every key the observable reports.
pub fn exact_sampler_expectation(
    j: &Jdm,
    observable: &dyn Fn(&LabeledGraph) -> BTreeMap<usize, f64>,
) -> Result<BTreeMap<usize, ExactTarget>> {
    #[derive(Default)]
    struct Sums {
        outer_num: f64,
        outer_den: f64,
        unweighted: f64,
        prod_num: f64,
        prod_den: f64,
    }
    let mut sums: BTreeMap<usize, Sums> = BTreeMap::new();
    for leaf in spectra_leaves(j)? {
        let w_s = leaf.log_weight.exp();
        let mut within: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for (g, p_g, lw) in graph_leaves(j, &leaf.matrix)? {
            let w_g = lw.exp();
            for (k, q) in observable(&g) {
                let e = within.entry(k).or_default();
                e.0 += p_g * w_g * q;
                e.1 += p_g * w_g;
                let s = sums.entry(k).or_default();
                s.unweighted += leaf.probability * p_g * q;
                s.prod_num += leaf.probability * p_g * w_s * w_g * q;
                s.prod_den += leaf.probability * p_g * w_s * w_g;
            }
        }
        for (k, (num, den)) in within {
            let s = sums.entry(k).or_default();
            s.outer_num += leaf.probability * w_s * num / den;
            s.outer_den += leaf.probability * w_s;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(k, s)| {
            (
                k,
                ExactTarget {
                    weighted: s.outer_num / s.outer_den,
                    unweighted: s.unweighted,
                    product_weighted: s.prod_num / s.prod_den,
                },
            )
        })
        .collect())
}

/// Nodes the undirected sampler's hub may link to next, found by trying
/// each candidate and searching for a completion: the hub's other stubs
/// over every subset of eligible nodes, the rest by Havel-Hakimi.
pub fn reference_allowed_undirected(residual: &[usize], hub: usize, forbidden: &[bool]) -> Vec<usize> {
    let cands: Vec<usize> = (0..residual.len())
        .filter(|&x| x != hub && !forbidden[x] && residual[x] > 0)
        .collect();
    cands
        .iter()
        .copied()
        .filter(|&j| {
            let mut r = residual.to_vec();
            r[hub] -= 1;
            r[j] -= 1;
            let need = r[hub];
            let pool: Vec<usize> = cands.iter().copied().filter(|&x| x != j && r[x] > 0).collect();
            subsets(pool.len(), need).into_iter().any(|pick| {
                let mut rr = r.clone();
                for &i in &pick {
                    rr[pool[i]] -= 1;
                }
                rr[hub] = 0;
                havel_hakimi(&rr)
            })
        })
        .collect()
}

/// Same for the directed sampler, with the completion found by exhaustive
/// backtracking where the hub never targets forbidden nodes.
pub fn reference_allowed_directed(residual: &[(usize, usize)], hub: usize, forbidden: &[bool]) -> Vec<usize> {
    (0..residual.len())
        .filter(|&x| x != hub && !forbidden[x] && residual[x].0 > 0)
        .filter(|&j| {
            let mut r = residual.to_vec();
            r[hub].1 -= 1;
            r[j].0 -= 1;
            directed_realizable_with(&r, |from, to| from == hub && (forbidden[to] || to == j))
        })
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
