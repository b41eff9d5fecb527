//! Launch-order planning for concurrently executing GPU kernels.
//!
//! - [`model`]: GPU limits, kernel profiles, per-SM footprints and profile combination.
//! - [`scheduler`]: greedy pairwise-scored round construction.
//! - [`simulator`]: round-robin block placement and round-based timing.
//! - [`explorer`]: exhaustive permutation sweeps and percentile ranking.
//! - [`fixtures`]: the benchmark kernel sets.

pub mod error;
pub mod explorer;
pub mod fixtures;
pub mod model;
pub mod scheduler;
pub mod simulator;

pub use error::{ExploreError, ModelError, SimError};
pub use explorer::{histogram, rank, sweep, Bin, SweepEntry, SweepReport};
pub use model::{
    compute_ratio, derive_footprint, derive_footprints, profile_combine, CombinedProfile,
    Footprint, GpuSpec, KernelFootprint, KernelProfile,
};
pub use scheduler::{
    build_schedule, fits_together, score_matrix, score_pair, LaunchOrder, PairScore, Round,
};
pub use simulator::{place_blocks, round_time, simulate, simulate_launch_order, SimResult};
