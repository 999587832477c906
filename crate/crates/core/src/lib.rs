//! Exact and anytime inference for credal networks.
//!
//! Credal variable elimination combines vertex tables of local credal sets,
//! pruning each combination to its extreme points (exact mode) or further
//! down to at most `k` points by repeatedly merging the closest pair
//! (k-reduction). The crate also carries the supporting geometry, a random
//! model generator, file formats and a benchmark harness.

pub mod bench;
pub mod generate;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod model;
pub mod preprocess;

pub use geometry::{Metric, PointSet};
pub use inference::{credal_ve, infer, InferenceError, ReductionPolicy};
pub use model::{
    validate_network, ConditionalCredalTable, CredalNetwork, CredalSet, Interval, IntervalResult,
    Query,
};
