//! Sherali-Adams pseudo-solutions on random uniform hypergraphs.
//!
//! The crate builds the dampened pseudo-solution `y_S = L^-|S| n^((1-beta) Phi*(S))`,
//! checks the lifted constraints it should satisfy, and measures integrality gaps
//! against exact integral optima.

pub mod conc;
pub mod error;
pub mod flow;
pub mod graph_search;
pub mod hgraph;
pub mod lift;
pub mod logvalue;
pub mod oracle;
pub mod phi;
pub mod pseudocal;
pub mod rational;
pub mod relax;
pub mod solution;

pub use error::{Error, Result};
pub use hgraph::{BipartiteGraph, Hypergraph, VertexSet};
pub use rational::Rational;
