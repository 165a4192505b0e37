//! Numerical companion for free boundary minimal surfaces in the unit ball built by
//! stacking equatorial discs and joining them with catenoidal bridges.
//!
//! Modules follow the construction pipeline: symmetry groups, topology, the balancing
//! parameters, the initial surface, its curvature, and spectral data for the Jacobi operator.

pub mod balance;
pub mod index;
pub mod spectra;
pub mod surface;
pub mod error;
pub mod geometry;
pub mod symgroup;
pub mod topology;
pub mod util;

pub use error::{Error, Result};
