//! Joint-degree-matrix graph sampling.
//!
//! Given a graphical joint-degree matrix, the samplers build simple graphs
//! realizing it in two stages: a degree-spectra matrix is drawn node by
//! node, then each class-pair subgraph is built edge by edge with a
//! degree-sequence sampler. Neither stage backtracks, and every sample
//! carries the log of its importance weight so ensemble averages can be
//! reweighted.
//!
//! ```
//! use jdm_core::{assembler, fixtures, rng};
//!
//! let jdm = fixtures::six_node_jdm();
//! let mut r = rng::derive_stream(42, rng::StreamDomain::Auxiliary, 0);
//! let sample = assembler::sample_jdm(&jdm, &mut r).unwrap();
//! assert!(jdm_core::model::validate_realization(&sample.graph, &jdm));
//! ```

pub mod assembler;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod graphicality;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod seqsample;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{
    degree_classes, extract_jdm, validate_realization, BiDegreeSequence, DegreeClassPartition,
    DegreeSequence, Jdm, LabeledGraph, WeightedSample,
};
pub use spectra::SpectraMatrix;
