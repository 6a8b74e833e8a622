//! Dilution of uniform randomness, pairs from shared randomness, and rate-distortion coding.

pub mod common_randomness;
pub mod dilution;
pub mod rate_distortion;

pub use common_randomness::{simulate_pair, PairSimulation};
pub use dilution::{build_dilution, realize_from_uniform, sample_dilution, DilutionPlan};
pub use rate_distortion::{rd_code_via_simulation, rd_curve, rd_function, rd_grid_oracle, DistortionSpec, RdCode, RdPoint};
