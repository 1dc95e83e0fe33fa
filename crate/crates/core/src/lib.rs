pub mod error;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod nn;
pub mod preprocess;
pub mod reduction;
pub mod rig;
pub mod seed;
pub mod synthdata;

pub use error::{Error, Result};
