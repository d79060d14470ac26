//! Small matrices with hand-checked properties, shared by tests and docs.

use crate::model::{Jdm, LabeledGraph};
use crate::spectra::SpectraMatrix;

/// Six nodes of degrees (2, 2, 2, 2, 3, 3) and seven edges. Its
/// realizations are the house-like pentagon, the hexagon with one chord
/// and the bow tie.
pub fn six_node_jdm() -> Jdm {
    Jdm::from_rows(&[vec![0, 0, 0], vec![0, 2, 4], vec![0, 4, 1]]).expect("symmetric")
}

/// Ten nodes with class sizes (1, 4, 3, 2) for degrees 1 through 4.
pub fn ten_node_jdm() -> Jdm {
    Jdm::from_rows(&[
        vec![0, 0, 0, 1],
        vec![0, 0, 4, 4],
        vec![0, 4, 1, 3],
        vec![1, 4, 3, 0],
    ])
    .expect("symmetric")
}

/// The spectra matrix of [`six_node_jdm`] whose realizations are exactly the
/// hexagon and bow-tie graphs: each degree-2 node has one neighbor in each
/// class, each degree-3 node has two degree-2 neighbors.
pub fn hexagon_bowtie_spectra() -> SpectraMatrix {
    SpectraMatrix::from_rows(&[
        vec![0, 0, 0, 0, 0, 0],
        vec![1, 1, 1, 1, 2, 2],
        vec![1, 1, 1, 1, 1, 1],
    ])
    .expect("rectangular")
}

/// Bow tie on the six-node layout: two triangles joined by an edge
/// between their degree-3 corners.
pub fn bowtie_graph() -> LabeledGraph {
    LabeledGraph::from_edges(6, [(0, 1), (0, 4), (1, 4), (2, 3), (2, 5), (3, 5), (4, 5)])
        .expect("simple")
}

/// Hexagon 0-4-1-2-5-3-0 with the chord between the degree-3 nodes.
pub fn hexagon_graph() -> LabeledGraph {
    LabeledGraph::from_edges(6, [(0, 4), (1, 4), (1, 2), (2, 5), (3, 5), (0, 3), (4, 5)])
        .expect("simple")
}

/// Pentagon 0-1-2-3-4 with node 5 joined to the adjacent pair {3, 4}.
/// Node labels do not follow the class layout of [`six_node_jdm`].
pub fn house_graph() -> LabeledGraph {
    LabeledGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (3, 5), (4, 5)])
        .expect("simple")
}
