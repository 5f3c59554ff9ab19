//! Trajectory mining with distributional kernel embeddings.
//!
//! Each trajectory is treated as a sample set from an unknown distribution
//! and mapped to a finite-dimensional kernel mean embedding, either under
//! the Isolation Kernel (data-dependent Voronoi partitionings) or under a
//! Nystrom approximation of the Gaussian kernel. Similarity between two
//! trajectories is then a plain dot product of their embeddings, which
//! takes time linear in trajectory length instead of the quadratic cost of
//! point-to-point distances such as DTW, Hausdorff or discrete Frechet.
//!
//! On top of the embeddings the crate provides:
//!
//! - anomalous trajectory detection with pluggable detectors
//!   ([`detect::detect`]: two-level isolation scoring, Gaussian
//!   distributional scoring, or LOF over embeddings),
//! - anomalous sub-trajectory detection ([`subtraj::detect_subtraj`]),
//! - frequent sub-trajectory pattern mining ([`patterns::mine_patterns`]),
//! - the classical baseline distances ([`distances`]),
//! - evaluation metrics and a scaleup benchmark harness ([`eval`]),
//! - deterministic synthetic dataset generators ([`synth`]).

pub mod detect;
pub mod distances;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod isolation;
pub mod model;
pub mod nystrom;
pub mod patterns;
pub mod subtraj;
pub mod synth;

pub use embedding::{distributional_kernel, embed_dataset, mean_map, EmbeddedDataset, Embedding, FeatureMap, Scheme};
pub use error::{Error, Result};
pub use isolation::PartitioningModel;
pub use model::{LabeledDataset, Point, SubTrajectorySpan, Trajectory};
pub use nystrom::NystromModel;
