//! Predictive coding schemes for intra prediction modes.
//!
//! The crate models the signalling of a block's intra prediction mode from
//! neighbour context in three steps: prediction (labels), clustering
//! (decision-tree tests) and coding (complete prefix codes). It computes
//! empirical entropy limits, derives schemes by greedy and genetic search,
//! and encodes/decodes mode streams bit-exactly under any scheme.

pub mod codec;
pub mod codes;
pub mod dataset;
pub mod dynlist;
pub mod entropy;
pub mod error;
pub mod labels;
pub mod scheme;
pub mod search;

pub use dataset::{
    build_histogram, load_samples, synth_dataset, ConditionalHistogram, Context, ContextTuple,
    Sample, SymbolSpace, SynthParams,
};
pub use error::{Error, Result};
