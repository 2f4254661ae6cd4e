//! Shared inputs for the benchmarks.

use pldp_core::{sample_instance, Instance, Model, SimConfig};

/// One instance at the (300, 150, 78, 39) partial operating point.
pub fn operating_point_instance(trial: u64) -> Instance {
    let cfg = SimConfig::new(Model::Partial, 300, 150, 78, 39, 1, 42).expect("valid configuration");
    sample_instance(&cfg, trial)
}
