//! Cantor-type construction of points on nondegenerate curves that are
//! inhomogeneously badly approximable for a weight vector, with exact
//! certificates and independent verification oracles.

pub mod cantor;
pub mod config;
pub mod constants;
pub mod curve;
pub mod dangerous;
pub mod error;
pub mod interval;
pub mod lattice;
pub mod measure;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod rational;
pub mod real;
pub mod registry;
pub mod weight;
