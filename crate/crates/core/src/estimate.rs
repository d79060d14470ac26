//! Observables and importance-weighted ensemble averages.
//!
//! Weights stay in log space throughout: every accumulator keeps the sums
//! relative to the largest log-weight seen so far and rescales when a larger
//! one arrives.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::LabeledGraph;

/// Longest cycle length [`cycle_counts`] accepts.
pub const MAX_CYCLE_LEN: usize = 8;

/// Per-sample observable values with their log-weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    values: Vec<f64>,
    log_weights: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(values: Vec<f64>, log_weights: Vec<f64>) -> Result<Self> {
        if values.len() != log_weights.len() {
            return Err(Error::Internal(format!(
                "{} values but {} log-weights",
                values.len(),
                log_weights.len()
            )));
        }
        if let Some(bad) = log_weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Internal(format!("log-weight {bad} is not finite")));
        }
        Ok(ObservableSeries { values, log_weights })
    }

    pub fn push(&mut self, value: f64, log_weight: f64) {
        assert!(log_weight.is_finite(), "log-weight {log_weight} is not finite");
        self.values.push(value);
        self.log_weights.push(log_weight);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    fn accumulate(&self) -> WeightedAccumulator {
        let mut acc = WeightedAccumulator::default();
        for (&q, &lw) in self.values.iter().zip(&self.log_weights) {
            acc.add(q, lw);
        }
        acc
    }
}

/// Σ Q_i w_i / Σ w_i with every weight shifted by the largest log-weight.
pub fn weighted_mean(series: &ObservableSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let shift = series.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (&q, &lw) in series.values.iter().zip(&series.log_weights) {
        let w = (lw - shift).exp();
        num += q * w;
        den += w;
    }
    Ok(num / den)
}

pub fn unweighted_mean(series: &ObservableSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.values.iter().sum::<f64>() / series.len() as f64)
}

/// (Σw)² / Σw².
pub fn effective_sample_size(series: &ObservableSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.accumulate().effective_sample_size())
}

/// Streaming weighted sums in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedAccumulator {
    shift: f64,
    sum_w: f64,
    sum_wq: f64,
    sum_w2: f64,
    sum_q: f64,
    count: u64,
}

impl Default for WeightedAccumulator {
    fn default() -> Self {
        WeightedAccumulator {
            shift: f64::NEG_INFINITY,
            sum_w: 0.0,
            sum_wq: 0.0,
            sum_w2: 0.0,
            sum_q: 0.0,
            count: 0,
        }
    }
}

impl WeightedAccumulator {
    pub fn add(&mut self, value: f64, log_weight: f64) {
        if log_weight > self.shift {
            let scale = (self.shift - log_weight).exp();
            self.sum_w *= scale;
            self.sum_wq *= scale;
            self.sum_w2 *= scale * scale;
            self.shift = log_weight;
        }
        let w = (log_weight - self.shift).exp();
        self.sum_w += w;
        self.sum_wq += w * value;
        self.sum_w2 += w * w;
        self.sum_q += value;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn weighted_mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptySeries);
        }
        Ok(self.sum_wq / self.sum_w)
    }

    pub fn unweighted_mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptySeries);
        }
        Ok(self.sum_q / self.count as f64)
    }

    pub fn effective_sample_size(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum_w * self.sum_w / self.sum_w2
    }

    /// ln Σ w.
    pub fn log_total_weight(&self) -> f64 {
        self.shift + self.sum_w.ln()
    }
}

/// Estimates of one observable over an ensemble grouped by spectra matrix.
///
/// `weighted` weighs each spectra matrix by its spectra weight and averages
/// the graphs of one matrix with their subgraph weights, so every spectra
/// matrix counts equally in the limit and, within one, every graph counts
/// equally. `product_weighted` uses the full per-sample weight directly.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub weighted: f64,
    pub unweighted: f64,
    pub product_weighted: f64,
    /// Effective sample size of the per-sample weights.
    pub effective_sample_size: f64,
    /// Effective number of spectra matrices under the spectra weights.
    pub spectra_effective_size: f64,
    pub samples: u64,
    pub spectra: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SpectraGroupedEstimator {
    groups: BTreeMap<u64, (f64, WeightedAccumulator)>,
    flat: WeightedAccumulator,
}

impl SpectraGroupedEstimator {
    pub fn add(&mut self, spectra_id: u64, spectra_log_weight: f64, log_weight: f64, value: f64) {
        let entry = self
            .groups
            .entry(spectra_id)
            .or_insert((spectra_log_weight, WeightedAccumulator::default()));
        entry.1.add(value, log_weight - spectra_log_weight);
        self.flat.add(value, log_weight);
    }

    pub fn estimate(&self) -> Result<Estimate> {
        if self.flat.count() == 0 {
            return Err(Error::EmptySeries);
        }
        let mut outer = WeightedAccumulator::default();
        for (slw, acc) in self.groups.values() {
            outer.add(acc.weighted_mean()?, *slw);
        }
        Ok(Estimate {
            weighted: outer.weighted_mean()?,
            unweighted: self.flat.unweighted_mean()?,
            product_weighted: self.flat.weighted_mean()?,
            effective_sample_size: self.flat.effective_sample_size(),
            spectra_effective_size: outer.effective_sample_size(),
            samples: self.flat.count(),
            spectra: self.groups.len(),
        })
    }
}

/// Keyed family of estimators, one per degree or cycle length.
#[derive(Debug, Clone, Default)]
pub struct EnsembleEstimator {
    per_key: BTreeMap<usize, SpectraGroupedEstimator>,
}

impl EnsembleEstimator {
    pub fn add(&mut self, spectra_id: u64, spectra_log_weight: f64, log_weight: f64, values: &BTreeMap<usize, f64>) {
        for (&k, &v) in values {
            self.per_key
                .entry(k)
                .or_default()
                .add(spectra_id, spectra_log_weight, log_weight, v);
        }
    }

    pub fn estimates(&self) -> Result<BTreeMap<usize, Estimate>> {
        if self.per_key.is_empty() {
            return Err(Error::EmptySeries);
        }
        self.per_key.iter().map(|(&k, e)| Ok((k, e.estimate()?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.max - self.min) / self.counts.len() as f64
    }
}

/// Counts of ln w over `bins` equal bins spanning [min, max], with the
/// sample mean and (n − 1)-normalized variance of ln w.
pub fn log_weight_histogram(series: &ObservableSeries, bins: usize) -> Result<Histogram> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let bins = bins.max(1);
    let lw = &series.log_weights;
    let min = lw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0u64; bins];
    for &x in lw {
        let idx = if max > min {
            (((x - min) / (max - min)) * bins as f64) as usize
        } else {
            0
        };
        counts[idx.min(bins - 1)] += 1;
    }
    let n = lw.len() as f64;
    let mean = lw.iter().sum::<f64>() / n;
    let variance = if lw.len() > 1 {
        lw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Histogram {
        min,
        max,
        counts,
        mean,
        variance,
    })
}

/// Mean local clustering coefficient of the nodes of each degree present.
/// Nodes of degree below two have coefficient zero.
pub fn clustering_by_degree(g: &LabeledGraph) -> BTreeMap<usize, f64> {
    let adj = g.adjacency();
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for nbrs in &adj {
        let d = nbrs.len();
        let c = if d < 2 {
            0.0
        } else {
            let mut links = 0usize;
            for (a, &x) in nbrs.iter().enumerate() {
                for &y in &nbrs[a + 1..] {
                    if g.has_edge(x, y) {
                        links += 1;
                    }
                }
            }
            links as f64 / (d * (d - 1) / 2) as f64
        };
        let e = sums.entry(d).or_insert((0.0, 0));
        e.0 += c;
        e.1 += 1;
    }
    sums.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect()
}

/// Number of distinct simple cycles of each length `3..=max_len`.
pub fn cycle_counts(g: &LabeledGraph, max_len: usize) -> Result<BTreeMap<usize, u64>> {
    if max_len > MAX_CYCLE_LEN {
        return Err(Error::MaxLenExceeded(max_len));
    }
    let adj = g.adjacency();
    let mut counts: BTreeMap<usize, u64> = (3..=max_len).map(|l| (l, 0)).collect();
    if max_len < 3 {
        return Ok(counts);
    }
    // every cycle is walked twice from its smallest node, once per direction
    let mut raw = vec![0u64; max_len + 1];
    let mut on_path = vec![false; g.node_count()];
    for start in 0..g.node_count() {
        on_path[start] = true;
        extend_path(&adj, start, start, 1, max_len, &mut on_path, &mut raw);
        on_path[start] = false;
    }
    for (len, c) in counts.iter_mut() {
        *c = raw[*len] / 2;
    }
    Ok(counts)
}

fn extend_path(
    adj: &[Vec<usize>],
    start: usize,
    at: usize,
    len: usize,
    max_len: usize,
    on_path: &mut [bool],
    raw: &mut [u64],
) {
    for &next in &adj[at] {
        if next == start && len >= 3 {
            raw[len] += 1;
        } else if next > start && !on_path[next] && len < max_len {
            on_path[next] = true;
            extend_path(adj, start, next, len + 1, max_len, on_path, raw);
            on_path[next] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn series(values: &[f64], lw: &[f64]) -> ObservableSeries {
        ObservableSeries::new(values.to_vec(), lw.to_vec()).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(weighted_mean(&series(&[1.0, 1.0, 1.0], &[0.3, -2.0, 7.0])).unwrap(), 1.0);
        let mut v = vec![0.25; 12];
        v.push(1.0 / 3.0);
        let w = weighted_mean(&series(&v, &[0.0; 13])).unwrap();
        assert!((w - 10.0 / 39.0).abs() < 1e-15);
        let w = weighted_mean(&series(&[0.0, 1.0], &[1000.0, 1000.0 + 3f64.ln()])).unwrap();
        assert!((w - 0.75).abs() < 1e-12);
        assert_eq!(unweighted_mean(&series(&[1.0, 2.0, 3.0], &[0.0; 3])).unwrap(), 2.0);
        assert_eq!(weighted_mean(&ObservableSeries::default()), Err(Error::EmptySeries));
        assert_eq!(unweighted_mean(&ObservableSeries::default()), Err(Error::EmptySeries));
    }

    #[test]
    fn series_rejects_bad_input() {
        assert!(ObservableSeries::new(vec![1.0], vec![]).is_err());
        assert!(ObservableSeries::new(vec![1.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn accumulator_matches_batch() {
        let v = [0.1, 0.7, 0.3, 0.9];
        let lw = [2.0, -1.0, 5.0, 4.5];
        let s = series(&v, &lw);
        let mut acc = WeightedAccumulator::default();
        for (&q, &w) in v.iter().zip(&lw) {
            acc.add(q, w);
        }
        assert!((acc.weighted_mean().unwrap() - weighted_mean(&s).unwrap()).abs() < 1e-14);
        let w: Vec<f64> = lw.iter().map(|x| x.exp()).collect();
        let ess = w.iter().sum::<f64>().powi(2) / w.iter().map(|x| x * x).sum::<f64>();
        assert!((effective_sample_size(&s).unwrap() - ess).abs() < 1e-12);
        let total: f64 = w.iter().sum();
        assert!((acc.log_total_weight() - total.ln()).abs() < 1e-12);
    }

    #[test]
    fn grouped_estimator_weighs_spectra_then_graphs() {
        let mut e = SpectraGroupedEstimator::default();
        e.add(0, 0.0, 0.0, 1.0);
        e.add(0, 0.0, 0.0, 1.0);
        e.add(1, 2f64.ln(), 2f64.ln(), 0.0);
        e.add(1, 2f64.ln(), 2f64.ln() + 3f64.ln(), 1.0);
        let est = e.estimate().unwrap();
        // spectra 0 averages 1, spectra 1 averages 3/4 within and counts double
        assert!((est.weighted - (1.0 + 2.0 * 0.75) / 3.0).abs() < 1e-12);
        assert!((est.unweighted - 0.75).abs() < 1e-12);
        assert_eq!((est.samples, est.spectra), (4, 2));
    }

    #[test]
    fn histogram() {
        let h = log_weight_histogram(&series(&[0.0; 4], &[1.5; 4]), 10).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.variance, 0.0);
        let h = log_weight_histogram(&series(&[0.0; 4], &[0.0, 1.0, 2.0, 3.0]), 3).unwrap();
        assert_eq!(h.counts, vec![1, 1, 2]);
        assert!((h.mean - 1.5).abs() < 1e-15);
        assert!((h.variance - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clustering_examples() {
        let tri = LabeledGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(clustering_by_degree(&tri), BTreeMap::from([(2, 1.0)]));
        let path = LabeledGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(clustering_by_degree(&path), BTreeMap::from([(1, 0.0), (2, 0.0)]));
        let bow = clustering_by_degree(&fixtures::bowtie_graph());
        assert_eq!(bow[&2], 1.0);
        assert!((bow[&3] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(clustering_by_degree(&fixtures::hexagon_graph()), BTreeMap::from([(2, 0.0), (3, 0.0)]));
        let house = clustering_by_degree(&fixtures::house_graph());
        assert_eq!(house[&2], 0.25);
        assert!((house[&3] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cycle_examples() {
        let tri = LabeledGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(cycle_counts(&tri, 3).unwrap(), BTreeMap::from([(3, 1)]));
        let sq = LabeledGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(cycle_counts(&sq, 4).unwrap(), BTreeMap::from([(3, 0), (4, 1)]));
        assert_eq!(
            cycle_counts(&fixtures::bowtie_graph(), 5).unwrap(),
            BTreeMap::from([(3, 2), (4, 0), (5, 0)])
        );
        let k4 = LabeledGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(cycle_counts(&k4, 4).unwrap(), BTreeMap::from([(3, 4), (4, 3)]));
        assert_eq!(cycle_counts(&tri, 9), Err(Error::MaxLenExceeded(9)));
    }
}
