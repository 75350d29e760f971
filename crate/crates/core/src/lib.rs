//! Numerical laboratory for limiting absorption, radiation conditions and Rellich-type
//! statements for Schrodinger operators with long-range potentials.

pub mod app;
pub mod calculus;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod norms;
pub mod phase;
pub mod resolvent;
pub mod sommerfeld;
pub mod stats;
pub mod suites;
pub mod weights;

pub use error::{LabError, Result};

/// Version tag carried by every machine-readable output.
pub const SCHEMA_VERSION: &str = "1";
