//! Sparse Johnson–Lindenstrauss transforms built from hashing.
//!
//! The core map sends each input coordinate to exactly one of k output
//! rows with a ±1 sign. Two preconditioners densify adversarial inputs
//! ahead of it: coordinate replication (c copies of x/√c, giving c
//! nonzeros per composed column and O(c) work per input nonzero) and a
//! block-diagonal randomized Hadamard transform (b·log b work per
//! touched block). A mergeable turnstile sketch exposes the streaming
//! side of the projection, and the verification module checks the
//! distortion, goodness, and tail guarantees empirically.

pub mod error;
pub mod hash_projection;
pub mod params;
pub mod preconditioners;
pub mod randomness;
pub mod transforms;
pub mod verification;

pub use error::Error;
pub use hash_projection::{HashProjection, Sketch};
pub use params::{JlParams, Warning};
pub use preconditioners::{
    bucket_masses, bucket_stats, fwht_in_place, BlockHadamard, BucketStats, ReplicationPlan,
};
pub use randomness::{DomainTag, SeededSource};
pub use transforms::{auto_apply, l1_replication, HadamardJl, L1Embed, PathTag, SparseJl};
pub use verification::{
    bucket_z_values, estimate_failure_rate, estimate_failure_rate_for_vector, goodness_rate,
    infnorm_tail_rate, l1_estimator_report, max_column_intersection, trial_seed,
    ColumnIntersectionReport, DenseMatrix, DistortionPath, DistortionReport, L1Report,
    VectorFamily, SMALL_INSTANCE_CAP,
};
