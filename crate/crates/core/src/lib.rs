pub mod applications;
pub mod caps;
pub mod cli;
pub mod covering;
pub mod error;
pub mod fidelity;
mod linalg;
pub mod prob;
pub mod seed;
pub mod simulate;
pub mod types;
pub mod zero_error;

pub use caps::Caps;
pub use error::{Error, Result};
pub use prob::{Channel, Distribution, JointDistribution};
