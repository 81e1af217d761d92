//! Capacity regions for identifier-based authentication systems with
//! degraded and less-noisy authentication channels.

pub mod binary;
pub mod classify;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod info;
pub mod region;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
