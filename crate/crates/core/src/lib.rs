//! Weighted heat-kernel pricing with Lévy random bridge information.

pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod lrb;
pub mod numerics;
pub mod pricing;
pub mod rng;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
