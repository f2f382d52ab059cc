//! Experiment drivers, result tables and operation-count estimates for the
//! `cpdeflate` crate, shared by the `bench` binary and the acceptance tests.

pub mod complexity;
pub mod config;
pub mod experiments;
pub mod rows;

pub use complexity::{complexity_estimate, FlopEstimate};
pub use config::{Algorithm, Experiment, ExperimentConfig};
pub use experiments::run;
pub use rows::{write_outputs, ResultRow};

/// Caps the global thread pool at `CPDEFLATE_THREADS` when set. Has no
/// effect once the pool is running.
pub fn configure_threads() {
    let Some(n) = std::env::var("CPDEFLATE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) else {
        return;
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
}
