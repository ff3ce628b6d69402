use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::field::ScalarField;
use crate::surface::geometry::{compute_geometry, mixed_voronoi_areas, SurfaceGeometry};
use crate::surface::mesh::{TriMesh, Vec3};

/// Normal speed f of a deformation x ↦ x + s f n, vanishing on boundary
/// vertices and their neighbours.
#[derive(Debug, Clone)]
pub struct VariationField {
    f: ScalarField,
    support: Vec<bool>,
}

impl VariationField {
    pub fn new(mesh: &TriMesh, f: ScalarField) -> Result<Self> {
        f.check_len(mesh.vertex_count())?;
        check_support(mesh, f.values())?;
        let support = f.values().iter().map(|&v| v != 0.0).collect();
        Ok(VariationField { f, support })
    }

    pub fn zero(mesh: &TriMesh) -> Self {
        VariationField {
            f: ScalarField::zeros(mesh.vertex_count()),
            support: vec![false; mesh.vertex_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        self.f.values()
    }

    pub fn field(&self) -> &ScalarField {
        &self.f
    }

    pub fn support_flags(&self) -> &[bool] {
        &self.support
    }
}

/// A field is compactly supported on the mesh when it vanishes on every
/// boundary vertex and on the one-ring of each.
pub(crate) fn check_support(mesh: &TriMesh, f: &[f64]) -> Result<()> {
    for v in (0..mesh.vertex_count()).filter(|&v| mesh.is_boundary(v)) {
        if let Some(&bad) = std::iter::once(&v)
            .chain(mesh.neighbors(v))
            .find(|&&j| f[j] != 0.0)
        {
            return Err(Error::Support(format!(
                "field is {} at vertex {bad}, which touches boundary vertex {v}",
                f[bad]
            )));
        }
    }
    Ok(())
}

/// (4π)⁻¹ Σ_i f_i (H_i − ⟨x_i, n_i⟩/2) e^{−|x_i|²/4} A_i, the derivative of F
/// along x ↦ x + s f n.
pub fn first_variation(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    var: &VariationField,
) -> Result<f64> {
    let f = var.values();
    if f.len() != mesh.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: mesh.vertex_count(),
            found: f.len(),
        });
    }
    check_support(mesh, f)?;
    let sum: f64 = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let residual = geom.mean_curvature[i] - 0.5 * x.dot(&geom.normal[i]);
            f[i] * residual * geom.gaussian_weight[i] * geom.vertex_area[i]
        })
        .sum();
    Ok(sum / (4.0 * PI))
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationCheck {
    pub step: f64,
    /// [F(x + s f n) − F(x − s f n)]/(2s).
    pub fd: f64,
    pub analytic: f64,
    /// Central difference of the total area.
    pub area_fd: f64,
    /// Σ_i f_i H_i A_i.
    pub area_analytic: f64,
    /// max_i |dA_i/ds − f_i H_i A_i| relative to max_i |f_i H_i A_i|.
    pub vertex_area_defect: f64,
}

impl VariationCheck {
    /// |fd − analytic| / max(1, |analytic|).
    pub fn relative_gap(&self) -> f64 {
        (self.fd - self.analytic).abs() / self.analytic.abs().max(1.0)
    }

    pub fn area_relative_gap(&self) -> f64 {
        (self.area_fd - self.area_analytic).abs() / self.area_analytic.abs().max(1e-300)
    }
}

fn diameter(mesh: &TriMesh) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in mesh.vertices() {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

/// Default finite-difference step: 1e-4 of the bounding-box diagonal.
pub fn default_step(mesh: &TriMesh) -> f64 {
    1e-4 * diameter(mesh)
}

/// Per-vertex areas and Gaussian weights of the offset mesh x + s f n.
fn offset_measure(
    mesh: &TriMesh,
    normal: &[Vec3],
    f: &[f64],
    s: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let moved: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, x)| x + normal[i] * (s * f[i]))
        .collect();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = tri.map(|k| moved[k]);
        if (b - a).cross(&(c - a)).dot(&mesh.triangle_cross(t)) <= 0.0 {
            return Err(Error::Step {
                step: s,
                triangle: t,
            });
        }
    }
    let offset = mesh.with_positions(moved).map_err(|e| match e {
        Error::Degenerate { triangle, .. } => Error::Step { step: s, triangle },
        other => other,
    })?;
    let area = mixed_voronoi_areas(&offset);
    let weight = offset
        .vertices()
        .iter()
        .map(crate::surface::geometry::gaussian_weight)
        .collect();
    Ok((area, weight))
}

/// Compares [`first_variation`] against central differences of F along the
/// normal deformation, together with the total and per-vertex area rates.
pub fn fd_variation_check(
    mesh: &TriMesh,
    var: &VariationField,
    step: Option<f64>,
) -> Result<VariationCheck> {
    let geom = compute_geometry(mesh)?;
    let analytic = first_variation(mesh, &geom, var)?;
    let s = step.unwrap_or_else(|| default_step(mesh));
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {s} must be positive"
        )));
    }
    let f = var.values();
    let (area_p, weight_p) = offset_measure(mesh, &geom.normal, f, s)?;
    let (area_m, weight_m) = offset_measure(mesh, &geom.normal, f, -s)?;

    let functional =
        |a: &[f64], w: &[f64]| a.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() / (4.0 * PI);
    let fd = (functional(&area_p, &weight_p) - functional(&area_m, &weight_m)) / (2.0 * s);

    let rate: Vec<f64> = area_p
        .iter()
        .zip(&area_m)
        .map(|(p, m)| (p - m) / (2.0 * s))
        .collect();
    let expected: Vec<f64> = (0..mesh.vertex_count())
        .map(|i| f[i] * geom.mean_curvature[i] * geom.vertex_area[i])
        .collect();
    let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = rate
        .iter()
        .zip(&expected)
        .fold(0.0f64, |m, (r, e)| m.max((r - e).abs()));

    Ok(VariationCheck {
        step: s,
        fd,
        analytic,
        area_fd: rate.iter().sum(),
        area_analytic: expected.iter().sum(),
        vertex_area_defect: if scale > 0.0 { worst / scale } else { worst },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinker::canonical::{icosphere, make_canonical, CanonicalKind};
    use crate::surface::field::{bump, smooth_random_field};
    use proptest::prelude::*;

    #[test]
    fn zero_variation() {
        let mesh = make_canonical(CanonicalKind::Sphere, 2).unwrap();
        let check = fd_variation_check(&mesh, &VariationField::zero(&mesh), None).unwrap();
        assert_eq!(check.fd, 0.0);
        assert_eq!(check.analytic, 0.0);
    }

    #[test]
    fn boundary_support_is_enforced() {
        let mesh = make_canonical(CanonicalKind::Plane, 1).unwrap();
        let f = ScalarField::constant(mesh.vertex_count(), 1.0);
        assert!(matches!(
            VariationField::new(&mesh, f),
            Err(Error::Support(_))
        ));
    }

    #[test]
    fn unit_sphere_moves_uphill() {
        // H − ⟨x, n⟩/2 = 3/2 on the radius-1 sphere
        let mesh = icosphere(1.0, 4).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        let c = Vec3::new(0.0, 0.0, 1.0);
        let f = ScalarField::from_fn(&mesh, |_, x| bump(x, &c, 0.8));
        let var = VariationField::new(&mesh, f.clone()).unwrap();
        let value = first_variation(&mesh, &geom, &var).unwrap();
        let oracle: f64 = (0..mesh.vertex_count())
            .map(|i| f[i] * 1.5 * (-0.25f64).exp() * geom.vertex_area[i])
            .sum::<f64>()
            / (4.0 * PI);
        assert!(value > 0.0);
        assert!(
            (value - oracle).abs() < 1e-3 * oracle,
            "{value} vs {oracle}"
        );
    }

    #[test]
    fn area_rate_matches_mean_curvature() {
        let mesh = make_canonical(CanonicalKind::Sphere, 3).unwrap();
        let var = VariationField::new(&mesh, smooth_random_field(&mesh, 7, 6.0)).unwrap();
        let check = fd_variation_check(&mesh, &var, None).unwrap();
        assert!(check.area_relative_gap() < 1e-6, "{check:?}");
    }

    #[test]
    fn folding_step_is_rejected() {
        let mesh = make_canonical(CanonicalKind::Sphere, 2).unwrap();
        let pole = Vec3::new(0.0, 0.0, 2.0);
        let f = ScalarField::from_fn(&mesh, |_, x| bump(x, &pole, 1.0));
        let var = VariationField::new(&mesh, f).unwrap();
        assert!(fd_variation_check(&mesh, &var, Some(1e-4)).is_ok());
        // pushing the cap through the sphere turns its rim inside out
        assert!(matches!(
            fd_variation_check(&mesh, &var, Some(3.0)),
            Err(Error::Step { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn first_variation_is_linear(seed_a in 0u64..1000, seed_b in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mesh = icosphere(1.3, 2).unwrap();
            let geom = compute_geometry(&mesh).unwrap();
            let fa = smooth_random_field(&mesh, seed_a, 6.0);
            let fb = smooth_random_field(&mesh, seed_b, 6.0);
            let combo: Vec<f64> = fa.values().iter().zip(fb.values()).map(|(x, y)| a * x + b * y).collect();
            let eval = |f: ScalarField| first_variation(&mesh, &geom, &VariationField::new(&mesh, f).unwrap()).unwrap();
            let lhs = eval(combo.into());
            let rhs = a * eval(fa) + b * eval(fb);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
