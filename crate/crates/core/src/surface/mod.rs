//! Triangle meshes, discrete differential operators and Gaussian-weighted
//! integration.

pub mod diagnostics;
pub mod distance;
pub mod field;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod operators;

pub use diagnostics::{area_growth_ratio, genus};
pub use field::{OperatorField, ScalarField};
pub use geometry::{compute_geometry, SurfaceGeometry};
pub use mesh::{TriMesh, Vec3};
pub use operators::{apply_l, laplace_beltrami, weighted_integral};
