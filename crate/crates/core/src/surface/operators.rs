//! Discrete Laplace–Beltrami, tangential gradient, the stability operator
//! L = Δ + |A|² − ½⟨x, ∇·⟩ + ½ and Gaussian-weighted integration.

use super::field::{OperatorField, ScalarField};
use super::geometry::SurfaceGeometry;
use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

fn check(mesh: &TriMesh, geom: &SurfaceGeometry, u: &ScalarField) -> Result<()> {
    if geom.len() != mesh.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: mesh.vertex_count(),
            found: geom.len(),
        });
    }
    u.check_len(mesh.vertex_count())
}

/// Cotangent Laplacian divided by the mixed Voronoi area.
pub fn laplace_beltrami(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    u: &ScalarField,
) -> Result<OperatorField> {
    check(mesh, geom, u)?;
    Ok(OperatorField::new(
        laplacian_values(mesh, geom, u.values()),
        mesh,
    ))
}

pub(crate) fn laplacian_values(mesh: &TriMesh, geom: &SurfaceGeometry, u: &[f64]) -> Vec<f64> {
    (0..mesh.vertex_count())
        .map(|v| {
            let ui = u[v];
            let sum: f64 = mesh
                .neighbors(v)
                .iter()
                .zip(geom.cotan.row(v))
                .map(|(&j, &w)| w * (u[j] - ui))
                .sum();
            sum / geom.vertex_area[v]
        })
        .collect()
}

/// Gradient of the piecewise-linear interpolant on each triangle.
pub fn face_gradients(mesh: &TriMesh, u: &[f64]) -> Vec<Vec3> {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let p = mesh.triangle_points(t);
            let cross = mesh.triangle_cross(t);
            let double_area = cross.norm();
            let n = cross / double_area;
            let mut g = Vec3::zeros();
            for k in 0..3 {
                let e = p[(k + 2) % 3] - p[(k + 1) % 3];
                g += u[tri[k]] * n.cross(&e);
            }
            g / double_area
        })
        .collect()
}

/// Area-weighted average of the incident face gradients, projected onto the
/// vertex tangent plane.
pub fn vertex_gradients(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    u: &ScalarField,
) -> Result<Vec<Vec3>> {
    check(mesh, geom, u)?;
    Ok(vertex_gradient_values(mesh, geom, u.values()))
}

pub(crate) fn vertex_gradient_values(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    u: &[f64],
) -> Vec<Vec3> {
    let faces = face_gradients(mesh, u);
    let areas: Vec<f64> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle_area(t))
        .collect();
    (0..mesh.vertex_count())
        .map(|v| {
            let mut g = Vec3::zeros();
            let mut total = 0.0;
            for &t in mesh.vertex_triangles(v) {
                g += areas[t] * faces[t];
                total += areas[t];
            }
            g /= total;
            let n = geom.normal[v];
            g - n * n.dot(&g)
        })
        .collect()
}

/// L u = Δu + |A|² u − ½⟨x, ∇u⟩ + ½ u.
pub fn apply_l(mesh: &TriMesh, geom: &SurfaceGeometry, u: &ScalarField) -> Result<OperatorField> {
    check(mesh, geom, u)?;
    Ok(OperatorField::new(l_values(mesh, geom, u.values()), mesh))
}

pub(crate) fn l_values(mesh: &TriMesh, geom: &SurfaceGeometry, u: &[f64]) -> Vec<f64> {
    let lap = laplacian_values(mesh, geom, u);
    let grad = vertex_gradient_values(mesh, geom, u);
    (0..mesh.vertex_count())
        .map(|v| {
            let x = mesh.vertices()[v];
            lap[v] + geom.second_fund_norm_sq[v] * u[v] - 0.5 * x.dot(&grad[v]) + 0.5 * u[v]
        })
        .collect()
}

/// Σ u · vertex_area · e^{−|x|²/4}, summed in vertex order.
pub fn weighted_integral(mesh: &TriMesh, geom: &SurfaceGeometry, u: &ScalarField) -> Result<f64> {
    check(mesh, geom, u)?;
    Ok(weighted_sum(geom, u.values()))
}

pub(crate) fn weighted_sum(geom: &SurfaceGeometry, u: &[f64]) -> f64 {
    u.iter()
        .zip(&geom.vertex_area)
        .zip(&geom.gaussian_weight)
        .map(|((u, a), w)| u * a * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinker::canonical::{icosphere, make_canonical, plane_patch, CanonicalKind};
    use crate::surface::geometry::compute_geometry;
    use std::f64::consts::{E, PI};

    #[test]
    fn laplacian_kills_constants() {
        for kind in CanonicalKind::ALL {
            let mesh = make_canonical(kind, 3).unwrap();
            let g = compute_geometry(&mesh).unwrap();
            let lap = laplace_beltrami(&mesh, &g, &ScalarField::constant(mesh.vertex_count(), 3.5))
                .unwrap();
            assert!(lap.interior_max_abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn coordinate_is_an_eigenfunction_on_the_unit_sphere() {
        let mut errors = Vec::new();
        for level in 2..=4 {
            let mesh = icosphere(1.0, level).unwrap();
            let g = compute_geometry(&mesh).unwrap();
            let z = ScalarField::from_fn(&mesh, |_, x| x.z);
            let lap = laplace_beltrami(&mesh, &g, &z).unwrap();
            let err = (0..mesh.vertex_count())
                .map(|v| (lap.at(v).unwrap() + 2.0 * z[v]).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[2] < 1e-2, "{errors:?}");
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    #[test]
    fn harmonic_quadratic_on_the_plane() {
        let mesh = plane_patch(2.0, 16).unwrap();
        let g = compute_geometry(&mesh).unwrap();
        let u = ScalarField::from_fn(&mesh, |_, x| x.x * x.x - x.y * x.y);
        let lap = laplace_beltrami(&mesh, &g, &u).unwrap();
        assert!(lap.interior_max_abs() < 1e-10);
    }

    #[test]
    fn gradient_of_linear_function_is_exact_on_the_plane() {
        let mesh = plane_patch(2.0, 8).unwrap();
        let g = compute_geometry(&mesh).unwrap();
        let u = ScalarField::from_fn(&mesh, |_, x| 2.0 * x.x - 0.5 * x.y);
        for grad in vertex_gradients(&mesh, &g, &u).unwrap() {
            assert!((grad - Vec3::new(2.0, -0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn stability_operator_on_constants_of_the_sphere() {
        let mesh = make_canonical(CanonicalKind::Sphere, 4).unwrap();
        let g = compute_geometry(&mesh).unwrap();
        let c = 1.7;
        let lu = apply_l(&mesh, &g, &ScalarField::constant(mesh.vertex_count(), c)).unwrap();
        for v in 0..mesh.vertex_count() {
            assert!((lu.at(v).unwrap() - c).abs() < 5e-3 * c);
        }
    }

    #[test]
    fn gaussian_weighted_area() {
        let plane = plane_patch(6.0, 96).unwrap();
        let g = compute_geometry(&plane).unwrap();
        let one = ScalarField::constant(plane.vertex_count(), 1.0);
        let plane_integral = weighted_integral(&plane, &g, &one).unwrap();
        assert!(
            (plane_integral / (4.0 * PI) - 1.0).abs() < 1e-3,
            "{plane_integral}"
        );
        let zero = ScalarField::zeros(plane.vertex_count());
        assert_eq!(weighted_integral(&plane, &g, &zero).unwrap(), 0.0);

        let sphere = make_canonical(CanonicalKind::Sphere, 4).unwrap();
        let g = compute_geometry(&sphere).unwrap();
        let one = ScalarField::constant(sphere.vertex_count(), 1.0);
        let sphere_integral = weighted_integral(&sphere, &g, &one).unwrap();
        assert!(
            (sphere_integral / (16.0 * PI / E) - 1.0).abs() < 5e-3,
            "{sphere_integral}"
        );
    }

    #[test]
    fn boundary_values_are_refused() {
        let mesh = plane_patch(1.0, 4).unwrap();
        let g = compute_geometry(&mesh).unwrap();
        let u = ScalarField::from_fn(&mesh, |_, x| x.x * x.y);
        let lap = laplace_beltrami(&mesh, &g, &u).unwrap();
        let b = (0..mesh.vertex_count())
            .find(|&v| mesh.is_boundary(v))
            .unwrap();
        assert!(matches!(lap.at(b), Err(Error::Boundary(v)) if v == b));
        assert!(!lap.is_trusted(b));
        assert_eq!(lap.interior()[b], 0.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let mesh = plane_patch(1.0, 4).unwrap();
        let g = compute_geometry(&mesh).unwrap();
        let short = ScalarField::zeros(3);
        assert!(matches!(
            apply_l(&mesh, &g, &short),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
