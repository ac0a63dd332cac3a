//! Replicate-parallel Monte Carlo estimation of ARL and EDD, and
//! simulation-based threshold calibration with common random numbers.
//!
//! Replicate `r` draws everything (fresh matrices, mean supports, noise)
//! from `RngStream(root_seed, r)`; a fixed projection comes from the
//! reserved stream [`PROJECTION_STREAM`]. Results are reduced in replicate
//! order, so they do not depend on the number of threads.

mod engine;
mod estimate;
mod plan;

pub use engine::PathRecord;
pub use estimate::{
    calibrate_b_mc, simulate, simulate_arl, simulate_edd, simulate_paths, Calibration, Executor,
    SimResult,
};
pub use plan::{
    load_topology, ChangeTime, DataSpec, DetectorSpec, MatrixMode, MeanSpec, Method,
    ProjectionSpec, SimPlan, PLAN_KEYS, PROJECTION_STREAM,
};
