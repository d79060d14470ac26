//! Edge-by-edge samplers for degree sequences and bi-degree sequences.
//!
//! A hub node places all of its stubs before the next hub is picked. Each
//! stub goes to a uniformly chosen node of the allowed set: the nodes the
//! hub may still link to without making the remaining residual sequence
//! unrealizable. The allowed set is everything above a fail threshold read
//! off the slack profile of one auxiliary sequence, so no candidate is
//! tested individually and the sampler never backtracks.

use crate::error::{Error, Result};
use crate::graphicality::{directed_sorted, eg_slacks, eg_sorted, DirectedSlacks};
use crate::model::{sort_lexicographic, BiDegreeSequence, DegreeSequence, LabeledGraph};
use crate::rng::{Chooser, RngChooser};

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Residual state of the undirected sampler.
#[derive(Debug, Clone)]
pub struct SamplerState {
    residual: Vec<usize>,
    forbidden: Vec<bool>,
    hub: Option<usize>,
    edges: Vec<(usize, usize)>,
    log_weight: f64,
    /// Hub residual degrees at selection time.
    hub_degrees: Vec<usize>,
    /// Allowed-set sizes, one per placed edge.
    allowed_sizes: Vec<usize>,
}

impl SamplerState {
    pub fn new(degrees: Vec<usize>) -> Self {
        let n = degrees.len();
        SamplerState {
            residual: degrees,
            forbidden: vec![false; n],
            hub: None,
            edges: Vec::new(),
            log_weight: 0.0,
            hub_degrees: Vec::new(),
            allowed_sizes: Vec::new(),
        }
    }

    /// State with a hub already chosen and some targets already used, as
    /// reached midway through a run.
    pub fn with_hub(residual: Vec<usize>, hub: usize, forbidden: &[usize]) -> Self {
        let mut s = SamplerState::new(residual);
        s.hub = Some(hub);
        s.forbidden[hub] = true;
        for &x in forbidden {
            s.forbidden[x] = true;
        }
        s
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    pub fn hub(&self) -> Option<usize> {
        self.hub
    }

    pub fn is_forbidden(&self, node: usize) -> bool {
        self.forbidden[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn hub_degrees(&self) -> &[usize] {
        &self.hub_degrees
    }

    pub fn allowed_sizes(&self) -> &[usize] {
        &self.allowed_sizes
    }

    /// Keeps the current hub while it has stubs; otherwise picks the node
    /// with the largest residual degree (lowest index on ties) and clears
    /// the forbidden set. Returns `None` once every stub is placed.
    pub fn select_hub(&mut self) -> Option<usize> {
        if let Some(h) = self.hub {
            if self.residual[h] > 0 {
                return Some(h);
            }
        }
        let (hub, &d) = self
            .residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        if d == 0 {
            self.hub = None;
            return None;
        }
        self.forbidden.fill(false);
        self.forbidden[hub] = true;
        self.hub = Some(hub);
        self.hub_degrees.push(d);
        self.log_weight -= ln_factorial(d);
        Some(hub)
    }

    /// Largest residual degree at or below the fail threshold, or −1 when
    /// every non-forbidden node with stubs is allowed.
    pub fn max_fail_degree(&self) -> Result<i64> {
        let threshold = self.fail_threshold()?;
        Ok(self
            .candidates()
            .map(|j| self.residual[j] as i64)
            .filter(|&r| r <= threshold)
            .max()
            .unwrap_or(-1))
    }

    /// Non-forbidden nodes with residual degree above the fail degree, in
    /// index order.
    pub fn allowed(&self) -> Result<Vec<usize>> {
        let kappa = self.max_fail_degree()?;
        Ok(self
            .candidates()
            .filter(|&j| self.residual[j] as i64 > kappa)
            .collect())
    }

    /// Links the hub to `node` and forbids `node` for the rest of this hub.
    pub fn connect(&mut self, node: usize) {
        let hub = self.hub.expect("connect needs a hub");
        debug_assert!(!self.forbidden[node] && self.residual[node] > 0);
        self.residual[hub] -= 1;
        self.residual[node] -= 1;
        self.forbidden[node] = true;
        self.edges.push((hub.min(node), hub.max(node)));
    }

    fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.residual.len()).filter(|&j| !self.forbidden[j] && self.residual[j] > 0)
    }

    /// Linking the hub to a node of residual `v` fails iff `v` is at most
    /// the returned threshold.
    ///
    /// The test sequence E drops the hub and pre-links its other `d̄ - 1`
    /// stubs to the largest non-forbidden nodes. Linking the last stub to a
    /// node of value `v` lowers the slack at `k` by one if `v <= k` and that
    /// node sits beyond position `k`, and raises it by one if it sits within
    /// the first `k`. A slack of −1 therefore fails every `v <= e_{k+1}`,
    /// a slack of 0 fails every `v <= min(k, e_{k+1})`.
    fn fail_threshold(&self) -> Result<i64> {
        let hub = self.hub.ok_or_else(|| Error::Internal("no hub selected".into()))?;
        let d = self.residual[hub];
        if d == 0 {
            return Err(Error::Internal("hub has no residual stubs".into()));
        }
        let max = self.residual.iter().copied().max().unwrap_or(0);
        let mut all = vec![0usize; max + 1];
        let mut free = vec![0usize; max + 1];
        for (j, &r) in self.residual.iter().enumerate() {
            if j != hub && r > 0 {
                all[r] += 1;
                if !self.forbidden[j] {
                    free[r] += 1;
                }
            }
        }
        let mut reduce = d - 1;
        for v in (1..=max).rev() {
            let t = reduce.min(free[v]);
            all[v] -= t;
            all[v - 1] += t;
            reduce -= t;
        }
        if reduce > 0 {
            return Err(Error::Internal("hub has more stubs than targets".into()));
        }
        let mut e = Vec::with_capacity(self.residual.len());
        for v in (1..=max).rev() {
            e.extend(std::iter::repeat_n(v, all[v]));
        }
        let mut threshold: i64 = -1;
        for (idx, s) in eg_slacks(&e).enumerate() {
            let k = idx as i64 + 1;
            let next = e.get(idx + 1).copied().unwrap_or(0) as i64;
            if s < -1 {
                return Err(Error::Internal("residual sequence cannot be completed".into()));
            }
            let bound = k.min(next);
            // past the peak of min(k, e_{k+1}) no later candidate can win
            if bound < threshold {
                break;
            }
            if s == -1 {
                threshold = threshold.max(next);
                break;
            }
            if s == 0 {
                threshold = threshold.max(bound);
            }
        }
        Ok(threshold)
    }
}

pub fn sample_undirected<R: rand::Rng + ?Sized>(d: &DegreeSequence, rng: &mut R) -> Result<(LabeledGraph, f64)> {
    let (edges, lw) = sample_undirected_nodes(d.as_slice(), &mut RngChooser(rng))?;
    Ok((LabeledGraph::from_edges(d.len(), edges)?, lw))
}

/// Builds a simple graph where node `i` has degree `degrees[i]`. The
/// log-weight is Σ ln|A| minus Σ ln(d̄!) over hubs.
pub fn sample_undirected_nodes(degrees: &[usize], chooser: &mut dyn Chooser) -> Result<(Vec<(usize, usize)>, f64)> {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if !eg_sorted(&sorted) {
        return Err(Error::NotGraphical(format!("degree sequence {sorted:?}")));
    }
    let mut state = SamplerState::new(degrees.to_vec());
    while state.select_hub().is_some() {
        let allowed = state.allowed()?;
        if allowed.is_empty() {
            return Err(Error::Internal("empty allowed set".into()));
        }
        let pick = allowed[chooser.choose(allowed.len())];
        state.log_weight += (allowed.len() as f64).ln();
        state.allowed_sizes.push(allowed.len());
        state.connect(pick);
    }
    Ok((state.edges, state.log_weight))
}

/// Residual state of the directed sampler; pairs are `(in, out)`.
#[derive(Debug, Clone)]
pub struct DirectedSamplerState {
    residual: Vec<(usize, usize)>,
    forbidden: Vec<bool>,
    hub: Option<usize>,
    edges: Vec<(usize, usize)>,
    log_weight: f64,
    allowed_sizes: Vec<usize>,
}

impl DirectedSamplerState {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        let n = pairs.len();
        DirectedSamplerState {
            residual: pairs,
            forbidden: vec![false; n],
            hub: None,
            edges: Vec::new(),
            log_weight: 0.0,
            allowed_sizes: Vec::new(),
        }
    }

    /// Midway state: `hub` chosen, `targets` already linked from it.
    pub fn with_hub(pairs: Vec<(usize, usize)>, hub: usize, targets: &[usize]) -> Self {
        let mut s = DirectedSamplerState::new(pairs);
        s.hub = Some(hub);
        s.reset_forbidden(hub);
        for &x in targets {
            s.forbidden[x] = true;
        }
        s
    }

    pub fn residual(&self) -> &[(usize, usize)] {
        &self.residual
    }

    pub fn hub(&self) -> Option<usize> {
        self.hub
    }

    pub fn is_forbidden(&self, node: usize) -> bool {
        self.forbidden[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn allowed_sizes(&self) -> &[usize] {
        &self.allowed_sizes
    }

    fn reset_forbidden(&mut self, hub: usize) {
        for (f, &(i, _)) in self.forbidden.iter_mut().zip(&self.residual) {
            *f = i == 0;
        }
        self.forbidden[hub] = true;
    }

    /// Keeps the current hub while it has out-stubs, otherwise takes the
    /// lowest-index node with out-stubs left. The forbidden set restarts as
    /// the hub plus every node without in-stubs.
    pub fn select_hub(&mut self) -> Option<usize> {
        if let Some(h) = self.hub {
            if self.residual[h].1 > 0 {
                return Some(h);
            }
        }
        let hub = self.residual.iter().position(|&(_, o)| o > 0);
        self.hub = hub;
        if let Some(h) = hub {
            self.reset_forbidden(h);
        }
        hub
    }

    /// Links the hub to `node` (hub → node) and forbids `node`.
    pub fn connect(&mut self, node: usize) {
        let hub = self.hub.expect("connect needs a hub");
        debug_assert!(!self.forbidden[node] && self.residual[node].0 > 0);
        self.residual[hub].1 -= 1;
        self.residual[node].0 -= 1;
        self.forbidden[node] = true;
        self.edges.push((hub, node));
    }

    fn candidates(&self) -> Vec<usize> {
        (0..self.residual.len())
            .filter(|&j| !self.forbidden[j] && self.residual[j].0 > 0)
            .collect()
    }

    /// Candidates whose link from the hub would leave the rest
    /// unrealizable, flagged in candidate order.
    ///
    /// E lowers the in-degrees of the first `b - 1` candidates in
    /// lexicographic order and zeroes the hub's out-degree. With
    /// `key_i(k) = in_i + [out_i >= k]` the lexicographic order sorts the
    /// keys for every `k`, and the `k`-th inequality only sees the top-`k`
    /// key sum. Lowering the in-degree of a node with key `x` raises that
    /// sum's slack by one exactly when `x` exceeds the key `K_k` at
    /// position `k + 1`, so a node fails iff some `k` with slack −1 has
    /// `in + [out >= k] <= K_k`.
    fn failing(&self, cands: &[usize]) -> Result<Vec<bool>> {
        let hub = self.hub.ok_or_else(|| Error::Internal("no hub selected".into()))?;
        let b = self.residual[hub].1;
        if b == 0 {
            return Err(Error::Internal("hub has no residual out-stubs".into()));
        }
        if cands.len() < b {
            return Err(Error::Internal("hub has more stubs than targets".into()));
        }
        let n = self.residual.len();
        let mut order = cands.to_vec();
        order.sort_by(|&x, &y| self.residual[y].cmp(&self.residual[x]).then(x.cmp(&y)));
        let mut e = self.residual.clone();
        for &j in &order[..b - 1] {
            e[j].0 -= 1;
        }
        e[hub].1 = 0;
        sort_lexicographic(&mut e);

        // prefix[b'] = max over tight k <= b' of K_k - 1
        // suffix[b'] = max over tight k > b' of K_k
        let mut prefix = vec![i64::MIN; n + 2];
        let mut suffix = vec![i64::MIN; n + 2];
        for (idx, s) in DirectedSlacks::new(&e).enumerate() {
            if s < -1 {
                return Err(Error::Internal("residual sequence cannot be completed".into()));
            }
            if s == -1 {
                let k = idx + 1;
                let key = e.get(k).map_or(0, |&(i, o)| i + usize::from(o >= k)) as i64;
                prefix[k] = prefix[k].max(key - 1);
                suffix[k - 1] = suffix[k - 1].max(key);
            }
        }
        for x in 1..prefix.len() {
            prefix[x] = prefix[x].max(prefix[x - 1]);
        }
        for x in (0..suffix.len() - 1).rev() {
            suffix[x] = suffix[x].max(suffix[x + 1]);
        }
        let phi = |out: usize| {
            let out = out.min(n + 1);
            prefix[out].max(suffix[out])
        };
        let fails = |(i, o): (usize, usize)| (i as i64) <= phi(o);

        // a top candidate behaves like the first one outside the top
        let pivot = order.get(b - 1).map(|&j| self.residual[j]);
        let top: std::collections::HashSet<usize> = order[..b - 1].iter().copied().collect();
        Ok(cands
            .iter()
            .map(|&j| match (top.contains(&j), pivot) {
                (true, Some(p)) => fails(p),
                _ => fails(self.residual[j]),
            })
            .collect())
    }

    /// Largest residual in-degree among candidates the hub cannot link to,
    /// or −1 when all are allowed.
    pub fn max_fail_in_degree(&self) -> Result<i64> {
        let cands = self.candidates();
        let fail = self.failing(&cands)?;
        Ok(cands
            .iter()
            .zip(&fail)
            .filter(|(_, &f)| f)
            .map(|(&j, _)| self.residual[j].0 as i64)
            .max()
            .unwrap_or(-1))
    }

    pub fn allowed(&self) -> Result<Vec<usize>> {
        let cands = self.candidates();
        let fail = self.failing(&cands)?;
        Ok(cands
            .into_iter()
            .zip(fail)
            .filter(|&(_, f)| !f)
            .map(|(j, _)| j)
            .collect())
    }
}

pub fn sample_directed<R: rand::Rng + ?Sized>(d: &BiDegreeSequence, rng: &mut R) -> Result<(Vec<(usize, usize)>, f64)> {
    sample_directed_nodes(d.as_slice(), &mut RngChooser(rng))
}

/// Builds a simple directed graph where node `i` has `(in, out)` degrees
/// `pairs[i]`. Edges are `(from, to)`; the log-weight is Σ ln|A|.
pub fn sample_directed_nodes(pairs: &[(usize, usize)], chooser: &mut dyn Chooser) -> Result<(Vec<(usize, usize)>, f64)> {
    let mut sorted = pairs.to_vec();
    sort_lexicographic(&mut sorted);
    if !directed_sorted(&sorted) {
        return Err(Error::NotGraphical(format!("bi-degree sequence {sorted:?}")));
    }
    let mut state = DirectedSamplerState::new(pairs.to_vec());
    while state.select_hub().is_some() {
        let allowed = state.allowed()?;
        if allowed.is_empty() {
            return Err(Error::Internal("empty allowed set".into()));
        }
        let pick = allowed[chooser.choose(allowed.len())];
        state.log_weight += (allowed.len() as f64).ln();
        state.allowed_sizes.push(allowed.len());
        state.connect(pick);
    }
    Ok((state.edges, state.log_weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, StreamDomain};

    #[test]
    fn undirected_fail_degree_examples() {
        let s = SamplerState::with_hub(vec![1, 1, 1, 1], 0, &[]);
        assert_eq!(s.max_fail_degree().unwrap(), -1);
        assert_eq!(s.allowed().unwrap(), vec![1, 2, 3]);

        let s = SamplerState::with_hub(vec![3, 2, 2, 2, 1], 0, &[]);
        assert_eq!(s.max_fail_degree().unwrap(), -1);

        // {2, 2, 1, 1} after hub 0 linked to node 2: node 1 still needs
        // two partners, so the hub's last stub must go to it
        let s = SamplerState::with_hub(vec![1, 2, 0, 1], 0, &[2]);
        assert_eq!(s.max_fail_degree().unwrap(), 1);
        assert_eq!(s.allowed().unwrap(), vec![1]);
    }

    #[test]
    fn undirected_small_cases() {
        let mut r = derive_stream(1, StreamDomain::Graph, 0);
        let (g, lw) = sample_undirected(&DegreeSequence::new(vec![1, 1]), &mut r).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(lw, 0.0);
        for id in 0..20 {
            let mut r = derive_stream(1, StreamDomain::Graph, id);
            let (g, _) = sample_undirected(&DegreeSequence::new(vec![2, 2, 2]), &mut r).unwrap();
            assert_eq!(g.edge_count(), 3);
        }
    }

    #[test]
    fn undirected_rejects_non_graphical() {
        let mut r = derive_stream(1, StreamDomain::Graph, 0);
        assert!(matches!(
            sample_undirected(&DegreeSequence::new(vec![3, 3, 1, 1]), &mut r),
            Err(Error::NotGraphical(_))
        ));
    }

    #[test]
    fn directed_fail_examples() {
        let s = DirectedSamplerState::with_hub(vec![(1, 1), (1, 1)], 0, &[]);
        assert_eq!(s.max_fail_in_degree().unwrap(), -1);
        assert_eq!(s.allowed().unwrap(), vec![1]);

        let s = DirectedSamplerState::with_hub(vec![(1, 0), (1, 0), (0, 2)], 2, &[]);
        assert_eq!(s.max_fail_in_degree().unwrap(), -1);
        assert_eq!(s.allowed().unwrap(), vec![0, 1]);
    }

    #[test]
    fn directed_small_cases() {
        let mut r = derive_stream(2, StreamDomain::Graph, 0);
        let (mut edges, lw) = sample_directed(&BiDegreeSequence::new(vec![(1, 1), (1, 1)]), &mut r).unwrap();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (1, 0)]);
        assert_eq!(lw, 0.0);

        let (mut edges, _) = sample_directed(&BiDegreeSequence::new(vec![(2, 2); 3]), &mut r).unwrap();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn weights_follow_recorded_choices() {
        let degrees = [3, 3, 2, 2, 2, 1, 1];
        let mut r = derive_stream(4, StreamDomain::Graph, 0);
        let mut state = SamplerState::new(degrees.to_vec());
        let mut ch = RngChooser(&mut r);
        while state.select_hub().is_some() {
            let a = state.allowed().unwrap();
            let pick = a[ch.choose(a.len())];
            state.log_weight += (a.len() as f64).ln();
            state.allowed_sizes.push(a.len());
            state.connect(pick);
        }
        let expected: f64 = state.allowed_sizes().iter().map(|&a| (a as f64).ln()).sum::<f64>()
            - state.hub_degrees().iter().map(|&d| ln_factorial(d)).sum::<f64>();
        assert!((state.log_weight() - expected).abs() < 1e-12);
        let g = LabeledGraph::from_edges(degrees.len(), state.edges().iter().copied()).unwrap();
        assert_eq!(g.degrees(), degrees.to_vec());
    }
}
