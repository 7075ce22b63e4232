//! Partitional clustering with a deterministic, distance-profile based
//! centroid initialization.
//!
//! The crate provides four K-Means flavours that share one Lloyd-style
//! engine:
//!
//! | algorithm   | initialization            | feature weights            |
//! |-------------|---------------------------|----------------------------|
//! | `kmeans`    | uniform random objects    | none                       |
//! | `swkmeans`  | uniform random objects    | static, 1.5 by default     |
//! | `dwkmeans`  | uniform random objects    | dynamic, from centroids    |
//! | `renovated` | lowest normalized-distance score | none                |
//!
//! Around the engine sit three distance metrics ([`Metric`]), the
//! Davies-Bouldin validity index ([`davies_bouldin`]) in two variants, dataset
//! loaders for the UCI `*.data` layouts ([`DatasetPreset`]) and a benchmark
//! harness ([`harness`]) that produces serializable [`BenchReport`]s.
//!
//! ```
//! use renokm_core::{make_blobs, run, BlobSpec, InitStrategy, Metric, RunConfig};
//!
//! let data = make_blobs(&BlobSpec { k: 3, per_cluster: 20, dims: 2, separation: 10.0, spread: 0.1, seed: 7 })?;
//! let cfg = RunConfig::new(3).init(InitStrategy::Renovated { metric: Metric::Euclidean });
//! let result = run(&data, &cfg)?;
//! assert!(result.converged);
//! # Ok::<(), renokm_core::Error>(())
//! ```

pub mod clustering;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod harness;
pub mod initseed;
pub mod report;
pub mod validity;

pub use clustering::{
    assign, dynamic_weights, run, update_centroids, ClusterModel, ClusteringResult, RunConfig,
    WeightMatrix, WeightStrategy, DEFAULT_MAX_ITER, DEFAULT_STATIC_WEIGHT, DEFAULT_TOL,
};
pub use dataset::{
    load_csv, make_blobs, normalize, parse_delimited, BlobSpec, Dataset, DatasetPreset, Delimiter,
    NormalizeMode,
};
pub use distance::{distance, pairwise, DistanceMatrix, Metric};
pub use error::{Error, ErrorCategory, Result};
pub use harness::{Algorithm, BenchConfig};
pub use initseed::{random_indices, random_init, renovated_init, InitScore, InitStrategy};
pub use report::{Aggregate, BenchRecord, BenchReport, ReportKind, Table};
pub use validity::{
    davies_bouldin, dispersion, partition_agreement, within_cluster_sse, DbBreakdown, DbVariant,
};
