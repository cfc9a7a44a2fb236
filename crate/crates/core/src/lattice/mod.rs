//! Flow matrices, lattices, shortest vectors and the escape test.

pub mod escape;
pub mod flow;
pub mod svp;

pub use escape::{escape_witness, sample_points, EscapeKernel, EscapeScales};
pub use flow::{dani_matrix, FlowKind, FlowMatrix, FlowParams};
pub use svp::{in_compact, shortest_nonzero, LatticeBasis, ShortestVector};
