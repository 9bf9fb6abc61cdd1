//! Knowledge-graph-enhanced collaborative filtering: relation-aware KG
//! propagation fused into a LightGCN-style interaction-graph backbone, with
//! cross-view contrastive learning on top of BPR ranking.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod objectives;
pub mod params;
pub mod propagation;
pub mod reference;
pub mod scalar;
pub mod selfcheck;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;
