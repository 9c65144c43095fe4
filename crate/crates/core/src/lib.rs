//! Dual (outer) billiards with respect to strictly convex hypersurfaces in
//! linear symplectic R^{2m}, and search for their 3-periodic orbits.

pub mod cli;
pub mod dual_map;
pub mod error;
pub mod orbit;
pub mod sharpness;
pub mod surface;
pub mod symplectic;

pub use error::{Error, Result};
