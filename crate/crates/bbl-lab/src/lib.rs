//! Scenario engine around the verification library: JSON scenario
//! files in, per-scenario reports and plots out, deterministically.

pub mod emit;
pub mod error;
pub mod generate;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
