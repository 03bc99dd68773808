//! Scalable 1-1 instance alignment between two knowledge bases by greedy
//! maximization of a quadratic assignment objective, with candidate
//! blocking via an inverted word index and score propagation over the
//! relationship graph.

pub mod config;
pub mod error;
pub mod eval;
pub mod index;
pub mod ingest;
pub mod kb;
pub mod matcher;
pub mod oaei;
pub mod oracle;
pub mod scoring;
pub mod synth;

pub use config::{AlignmentConfig, NeighborWeightMode, SeedMode, SimKind, Smoothing};
pub use error::{Result, SigmaError};
pub use kb::{EntityId, KnowledgeBase, Literal, Matching};
