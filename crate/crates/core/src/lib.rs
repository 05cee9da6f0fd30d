//! Stochastic distance to k-connectivity: exact oracles, random augmentation,
//! a CONGEST simulator and the distributed testers that run on it.

pub mod augment;
pub mod cli;
pub mod congest;
pub mod conn_tester;
pub mod error;
pub mod graph;
pub mod harness;
pub mod kconn;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
