//! Datasets, model files, reports and experiment drivers for general vector
//! machines. The algorithms live in `gvm-core`; this crate adds the std side.

pub mod config;
pub mod error;
pub mod experiments;
pub mod mnist;
pub mod model;
pub mod parallel;
pub mod report;
pub mod wash;
pub mod wisconsin;

pub use error::{Error, Result};
