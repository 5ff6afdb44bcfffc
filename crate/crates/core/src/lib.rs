//! Node-private continual release of graph statistics on insertion-only
//! graph streams.
//!
//! The pipeline projects the stream onto a degree-bounded one, privately
//! tests how far the input is from violating the degree assumption, and
//! releases noisy prefix sums of the projected statistic while the test
//! passes. The [`stability`] module verifies how projections react to
//! neighboring inputs.

pub mod bench;
pub mod boundedness;
pub mod error;
pub mod noise;
pub mod projection;
pub mod stability;
pub mod stats;
pub mod stream;
pub mod svt;
pub mod transform;
pub mod tree;

pub use boundedness::{dist_to_graph, BoundednessTracker};
pub use error::{Error, Result};
pub use noise::NoiseSource;
pub use projection::{project_stream, InclusionCriterion, ProjectionState};
pub use stats::{inc_edge_sens, RestrictedEstimator, StatTracker, StatisticKind, StreamingEstimator};
pub use stream::{Edge, FlattenedGraph, GraphStream, NodeId, StreamBatch, StreamBuilder, StreamError};
pub use svt::{SparseVector, Verdict};
pub use transform::{transform_run, TransformConfig, TransformPipeline};
pub use tree::TreeMechanism;
