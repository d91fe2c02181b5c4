//! Dynamics of finitely generated subgroups of PU(1,n) on complex projective
//! space.
//!
//! The crate classifies isometries of complex hyperbolic space, computes
//! sup-norm normalized limits of element sequences as quasi-projective maps,
//! approximates the Chen-Greenberg limit set by orbit accumulation or by
//! fixed points of loxodromic words, and evaluates the equicontinuity region
//! as the complement of the complex hyperplanes tangent to the sphere at
//! limit points.

pub mod eqregion;
pub mod error;
pub mod isometry;
pub mod limitset;
pub mod linalg;
pub mod projective;
pub mod quasiproj;
pub mod random;
mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
