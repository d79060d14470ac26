//! Full JDM sampler: a spectra matrix splits the graph into edge-disjoint
//! class-pair subgraphs with known degree sequences, each subgraph is built
//! by a sequence sampler, and the union is the sample.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphicality::jdm_is_graphical;
use crate::model::{degree_classes, DegreeClassPartition, Jdm, LabeledGraph, WeightedSample};
use crate::rng::{derive_stream, Chooser, RngChooser, StreamDomain};
use crate::seqsample::{sample_directed_nodes, sample_undirected_nodes};
use crate::spectra::{sample_spectra_with, SpectraMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgraphKind {
    /// Edges inside one class.
    Unipartite,
    /// Edges between two classes.
    Bipartite,
}

/// Degree-sequence problem of one class pair, in local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphProblem {
    pub classes: (usize, usize),
    pub kind: SubgraphKind,
    /// Global id of each local node. Bipartite problems list the α side
    /// first.
    pub nodes: Vec<usize>,
    /// Degree of each local node inside this subgraph.
    pub degrees: Vec<usize>,
    /// Number of α-side nodes; equals `nodes.len()` for unipartite problems.
    pub side_split: usize,
    pub edge_budget: usize,
}

/// One problem per class pair `α <= β` with J_{αβ} > 0, ascending. Nodes
/// with no edges in a subgraph are left out of it.
pub fn decompose(j: &Jdm, s: &SpectraMatrix, part: &DegreeClassPartition) -> Result<Vec<SubgraphProblem>> {
    if s.nodes() != part.total_nodes() || s.dim() < part.max_degree() {
        return Err(Error::InconsistentSpectra("matrix shape does not match the partition".into()));
    }
    let mut out = Vec::new();
    for alpha in part.degrees_ascending() {
        for beta in part.degrees_ascending().into_iter().filter(|&b| b >= alpha) {
            let budget = j.get(alpha, beta);
            if budget == 0 {
                continue;
            }
            let mut nodes = Vec::new();
            let mut degrees = Vec::new();
            for i in part.nodes_of(alpha) {
                let d = s.get(beta, i);
                if d > 0 {
                    nodes.push(i);
                    degrees.push(d);
                }
            }
            let side_split = nodes.len();
            let alpha_sum: usize = degrees.iter().sum();
            let kind = if alpha == beta {
                if alpha_sum != 2 * budget {
                    return Err(Error::InconsistentSpectra(format!(
                        "class {alpha} carries {alpha_sum} internal stubs, expected {}",
                        2 * budget
                    )));
                }
                SubgraphKind::Unipartite
            } else {
                for i in part.nodes_of(beta) {
                    let d = s.get(alpha, i);
                    if d > 0 {
                        nodes.push(i);
                        degrees.push(d);
                    }
                }
                let beta_sum: usize = degrees[side_split..].iter().sum();
                if alpha_sum != budget || beta_sum != budget {
                    return Err(Error::InconsistentSpectra(format!(
                        "pair ({alpha}, {beta}) sides carry {alpha_sum} and {beta_sum} edges, expected {budget}"
                    )));
                }
                SubgraphKind::Bipartite
            };
            out.push(SubgraphProblem {
                classes: (alpha, beta),
                kind,
                nodes,
                degrees,
                side_split,
                edge_budget: budget,
            });
        }
    }
    Ok(out)
}

/// Samples one subgraph and returns its edges in global ids with the
/// subgraph log-weight. Bipartite problems run the directed sampler with
/// α-side nodes receiving and β-side nodes sending.
pub fn sample_subgraph(p: &SubgraphProblem, chooser: &mut dyn Chooser) -> Result<(Vec<(usize, usize)>, f64)> {
    let (local, lw) = match p.kind {
        SubgraphKind::Unipartite => sample_undirected_nodes(&p.degrees, chooser)?,
        SubgraphKind::Bipartite => {
            let pairs: Vec<(usize, usize)> = p
                .degrees
                .iter()
                .enumerate()
                .map(|(i, &d)| if i < p.side_split { (d, 0) } else { (0, d) })
                .collect();
            sample_directed_nodes(&pairs, chooser)?
        }
    };
    let edges = local.into_iter().map(|(u, v)| (p.nodes[u], p.nodes[v])).collect();
    Ok((edges, lw))
}

/// Builds a graph for a fixed spectra matrix. `spectra_log_weight` is added
/// to the subgraph log-weights.
pub fn sample_jdm_graph_with(
    j: &Jdm,
    part: &DegreeClassPartition,
    s: &SpectraMatrix,
    spectra_log_weight: f64,
    chooser: &mut dyn Chooser,
) -> Result<(LabeledGraph, f64)> {
    let problems = decompose(j, s, part)?;
    let mut g = LabeledGraph::new(part.total_nodes());
    let mut lw = spectra_log_weight;
    for p in &problems {
        let (edges, w) = sample_subgraph(p, chooser)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        lw += w;
    }
    Ok((g, lw))
}

pub fn sample_jdm_graph<R: rand::Rng + ?Sized>(
    j: &Jdm,
    s: &SpectraMatrix,
    spectra_log_weight: f64,
    rng: &mut R,
) -> Result<WeightedSample> {
    let part = degree_classes(j)?;
    let (graph, log_weight) = sample_jdm_graph_with(j, &part, s, spectra_log_weight, &mut RngChooser(rng))?;
    Ok(WeightedSample {
        sample_id: 0,
        spectra_id: 0,
        log_weight,
        spectra_log_weight,
        graph,
    })
}

/// Draws a spectra matrix and one graph for it from a single generator.
pub fn sample_jdm<R: rand::Rng + ?Sized>(j: &Jdm, rng: &mut R) -> Result<WeightedSample> {
    let part = degree_classes(j)?;
    let mut ch = RngChooser(rng);
    let s = sample_spectra_with(j, &part, &mut ch)?;
    let (graph, log_weight) = sample_jdm_graph_with(j, &part, &s.matrix, s.log_weight, &mut ch)?;
    Ok(WeightedSample {
        sample_id: 0,
        spectra_id: 0,
        log_weight,
        spectra_log_weight: s.log_weight,
        graph,
    })
}

/// Ensemble shape and master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub n_spectra: u64,
    pub samples_per_spectra: u64,
}

/// Samples of one spectra matrix, `samples_per_spectra` graphs drawn from
/// their own streams. Sample ids are `spectra_id · samples_per_spectra + k`.
pub fn spectra_batch(
    j: &Jdm,
    part: &DegreeClassPartition,
    cfg: &EnsembleConfig,
    spectra_id: u64,
) -> Result<Vec<WeightedSample>> {
    let mut rng = derive_stream(cfg.seed, StreamDomain::Spectra, spectra_id);
    let s = sample_spectra_with(j, part, &mut RngChooser(&mut rng))?;
    graph_batch(j, part, cfg, spectra_id, &s.matrix, s.log_weight)
}

/// The graph half of [`spectra_batch`] for a spectra matrix drawn earlier,
/// e.g. one reloaded from a spectra file.
pub fn graph_batch(
    j: &Jdm,
    part: &DegreeClassPartition,
    cfg: &EnsembleConfig,
    spectra_id: u64,
    s: &SpectraMatrix,
    spectra_log_weight: f64,
) -> Result<Vec<WeightedSample>> {
    (0..cfg.samples_per_spectra)
        .map(|k| {
            let sample_id = spectra_id * cfg.samples_per_spectra + k;
            let mut rng = derive_stream(cfg.seed, StreamDomain::Graph, sample_id);
            let (graph, log_weight) =
                sample_jdm_graph_with(j, part, s, spectra_log_weight, &mut RngChooser(&mut rng))?;
            Ok(WeightedSample {
                sample_id,
                spectra_id,
                log_weight,
                spectra_log_weight,
                graph,
            })
        })
        .collect()
}

/// Generates the ensemble in parallel and hands each spectra's batch to
/// `sink` in spectra-id order. Output depends only on the configuration,
/// not on the thread count.
pub fn run_ensemble<F>(j: &Jdm, cfg: &EnsembleConfig, jobs: Option<usize>, mut sink: F) -> Result<()>
where
    F: FnMut(Vec<WeightedSample>) -> Result<()>,
{
    if !jdm_is_graphical(j) {
        return Err(Error::NotGraphical("joint-degree matrix fails the realizability conditions".into()));
    }
    let part = degree_classes(j)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let chunk = (pool.current_num_threads() as u64 * 8).max(1);
    let mut start = 0;
    while start < cfg.n_spectra {
        let end = (start + chunk).min(cfg.n_spectra);
        let batches: Vec<Result<Vec<WeightedSample>>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|sid| spectra_batch(j, &part, cfg, sid))
                .collect()
        });
        for b in batches {
            sink(b?)?;
        }
        start = end;
    }
    Ok(())
}

/// Collects a whole ensemble in memory.
pub fn sample_ensemble(j: &Jdm, cfg: &EnsembleConfig) -> Result<Vec<WeightedSample>> {
    let mut out = Vec::new();
    run_ensemble(j, cfg, None, |b| {
        out.extend(b);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{check_labeled_realization, validate_realization};

    #[test]
    fn hexagon_bowtie_decomposition() {
        let j = fixtures::six_node_jdm();
        let part = degree_classes(&j).unwrap();
        let probs = decompose(&j, &fixtures::hexagon_bowtie_spectra(), &part).unwrap();
        let shape: Vec<_> = probs
            .iter()
            .map(|p| (p.classes, p.kind, p.side_split, p.nodes.len() - p.side_split, p.edge_budget))
            .collect();
        assert_eq!(
            shape,
            vec![
                ((2, 2), SubgraphKind::Unipartite, 4, 0, 2),
                ((2, 3), SubgraphKind::Bipartite, 4, 2, 4),
                ((3, 3), SubgraphKind::Unipartite, 2, 0, 1),
            ]
        );
    }

    #[test]
    fn ten_node_decomposition_has_one_problem_per_nonzero_pair() {
        let j = fixtures::ten_node_jdm();
        let part = degree_classes(&j).unwrap();
        let mut r = derive_stream(0, StreamDomain::Spectra, 0);
        let s = sample_spectra_with(&j, &part, &mut RngChooser(&mut r)).unwrap();
        let classes: Vec<_> = decompose(&j, &s.matrix, &part).unwrap().iter().map(|p| p.classes).collect();
        assert_eq!(classes, vec![(1, 4), (2, 3), (2, 4), (3, 3), (3, 4)]);
    }

    #[test]
    fn inconsistent_spectra_are_rejected() {
        let j = fixtures::six_node_jdm();
        let part = degree_classes(&j).unwrap();
        let bad = SpectraMatrix::from_rows(&[vec![0; 6], vec![2, 0, 1, 1, 2, 2], vec![0, 2, 1, 0, 1, 1]]).unwrap();
        assert!(matches!(decompose(&j, &bad, &part), Err(Error::InconsistentSpectra(_))));
    }

    #[test]
    fn single_edge() {
        let mut j = Jdm::zeros(1);
        j.set(1, 1, 1);
        let mut r = derive_stream(0, StreamDomain::Graph, 0);
        let s = sample_jdm(&j, &mut r).unwrap();
        assert_eq!(s.graph.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(s.log_weight, 0.0);
    }

    #[test]
    fn ensembles_validate_and_are_reproducible() {
        for j in [fixtures::six_node_jdm(), fixtures::ten_node_jdm()] {
            let part = degree_classes(&j).unwrap();
            let cfg = EnsembleConfig { seed: 42, n_spectra: 10, samples_per_spectra: 10 };
            let a = sample_ensemble(&j, &cfg).unwrap();
            assert_eq!(a.len(), 100);
            for (i, s) in a.iter().enumerate() {
                assert_eq!(s.sample_id, i as u64);
                assert_eq!(s.spectra_id, i as u64 / 10);
                assert!(validate_realization(&s.graph, &j));
                assert_eq!(check_labeled_realization(&s.graph, &j, &part), Ok(()));
                assert_eq!(s.graph.edge_count(), part.total_edges());
            }
            let mut b = Vec::new();
            run_ensemble(&j, &cfg, Some(1), |x| {
                b.extend(x);
                Ok(())
            })
            .unwrap();
            assert_eq!(a, b);
        }
    }
}
