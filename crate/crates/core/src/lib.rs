pub mod angle;
pub mod defect;
pub mod error;
pub mod lattice;
pub mod limit;
pub mod localization;
pub mod spectral;
pub mod stationary;
pub mod topology;

pub use error::{QwalkError, Result};
