//! The Gaussian area F(Σ) = (4π)⁻¹ ∫_Σ e^{−|x|²/4} dμ of surfaces in R³, its
//! first variation along normal deformations, and the conformally flat
//! metric e^{−|x|²/2n} δ on R^{n+1} in which shrinkers are minimal.

pub mod conformal;
pub mod variation;

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::shrinker::canonical::{CanonicalKind, CYLINDER_RADIUS, TRUNCATION_HALF_WIDTH};
use crate::surface::geometry::SurfaceGeometry;
use crate::surface::mesh::TriMesh;

pub use conformal::{conformal_report, conformal_scalar_curvature, ConformalReport};
pub use variation::{fd_variation_check, first_variation, VariationCheck, VariationField};

/// F of a triangle mesh: (4π)⁻¹ Σ_i A_i e^{−|x_i|²/4}.
pub fn f_value(mesh: &TriMesh, geom: &SurfaceGeometry) -> f64 {
    debug_assert_eq!(mesh.vertex_count(), geom.len());
    let sum: f64 = geom
        .vertex_area
        .iter()
        .zip(&geom.gaussian_weight)
        .map(|(a, w)| a * w)
        .sum();
    sum / (4.0 * PI)
}

/// Closed-form F of the complete canonical shrinker.
pub fn canonical_f(kind: CanonicalKind) -> f64 {
    match kind {
        CanonicalKind::Plane => 1.0,
        CanonicalKind::Sphere => 4.0 / std::f64::consts::E,
        CanonicalKind::Cylinder => (2.0 * PI / std::f64::consts::E).sqrt(),
    }
}

/// Upper bound on the part of F lost by truncating the canonical shrinker
/// to its standard patch. The plane patch contains the disk of radius 8;
/// the cylinder tail is exact: √(2π/e)·erfc(L/2) for half-length L.
pub fn truncation_tail(kind: CanonicalKind) -> f64 {
    let l = TRUNCATION_HALF_WIDTH;
    match kind {
        CanonicalKind::Plane => (-l * l / 4.0).exp(),
        CanonicalKind::Sphere => 0.0,
        CanonicalKind::Cylinder => {
            debug_assert!((CYLINDER_RADIUS * CYLINDER_RADIUS - 2.0).abs() < 1e-12);
            canonical_f(kind) * erfc(l / 2.0)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub value: f64,
    pub truncation_tail: f64,
    pub expected: f64,
    pub relative_error: f64,
}

pub fn canonical_functional_report(
    kind: CanonicalKind,
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
) -> FunctionalReport {
    let value = f_value(mesh, geom);
    let expected = canonical_f(kind);
    FunctionalReport {
        value,
        truncation_tail: truncation_tail(kind),
        expected,
        relative_error: (value - expected).abs() / expected,
    }
}
