//! Topological and area-growth diagnostics.

use super::distance::closest_point_on_triangle;
use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

/// Genus of the closed surface obtained by capping every boundary loop with a
/// disk: g = (2 − χ − b)/2.
pub fn genus(mesh: &TriMesh) -> Result<u32> {
    let chi = mesh.euler_characteristic();
    let b = mesh.boundary_loop_count() as i64;
    let twice = 2 - chi - b;
    if twice < 0 || twice % 2 != 0 {
        // connected orientable surfaces always give an even, non-negative value
        return Err(Error::Orientation(format!(
            "χ = {chi} with {b} boundary loops is not a connected orientable surface"
        )));
    }
    Ok((twice / 2) as u32)
}

/// Maximum over the given balls of Area(B_R(x₀) ∩ Σ)/R².
///
/// Every centre is paired with every radius. Triangles straddling a ball
/// boundary are split at edge midpoints (at least once, and until their edges
/// are shorter than R/16) and then clipped linearly against the sphere.
pub fn area_growth_ratio(mesh: &TriMesh, centers: &[Vec3], radii: &[f64]) -> Result<f64> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "ball radius {r} must be positive"
        )));
    }
    let mut best = 0.0f64;
    for c in centers {
        for &r in radii {
            let area = ball_area(mesh, c, r);
            best = best.max(area / (r * r));
        }
    }
    Ok(best)
}

/// Area of the part of the mesh inside the closed ball B_R(c).
pub fn ball_area(mesh: &TriMesh, c: &Vec3, r: f64) -> f64 {
    (0..mesh.triangle_count())
        .map(|t| clipped_area(mesh.triangle_points(t), c, r, true, MAX_SPLIT_DEPTH))
        .sum()
}

fn tri_area(p: &[Vec3; 3]) -> f64 {
    0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm()
}

fn midpoint_split(p: [Vec3; 3]) -> [[Vec3; 3]; 4] {
    let ab = (p[0] + p[1]) / 2.0;
    let bc = (p[1] + p[2]) / 2.0;
    let ca = (p[2] + p[0]) / 2.0;
    [[p[0], ab, ca], [ab, p[1], bc], [ca, bc, p[2]], [ab, bc, ca]]
}

const MAX_SPLIT_DEPTH: u32 = 10;

fn longest_edge(p: &[Vec3; 3]) -> f64 {
    (0..3)
        .map(|k| (p[(k + 1) % 3] - p[k]).norm())
        .fold(0.0, f64::max)
}

/// Triangles with all corners outside that still touch the ball (a small ball
/// inside a large triangle) are split as well.
fn clipped_area(p: [Vec3; 3], c: &Vec3, r: f64, first: bool, depth: u32) -> f64 {
    let inside: [bool; 3] = std::array::from_fn(|k| (p[k] - c).norm() <= r);
    let count = inside.iter().filter(|&&b| b).count();
    match count {
        3 => tri_area(&p),
        0 => {
            let near = closest_point_on_triangle(c, &p[0], &p[1], &p[2]);
            if (near - c).norm() >= r || depth == 0 {
                0.0
            } else {
                midpoint_split(p)
                    .into_iter()
                    .map(|q| clipped_area(q, c, r, false, depth - 1))
                    .sum()
            }
        }
        _ if depth > 0 && (first || longest_edge(&p) > r / 16.0) => midpoint_split(p)
            .into_iter()
            .map(|q| clipped_area(q, c, r, false, depth - 1))
            .sum(),
        _ => {
            let mut poly: Vec<Vec3> = Vec::with_capacity(5);
            for k in 0..3 {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                if inside[k] {
                    poly.push(a);
                }
                if inside[k] != inside[(k + 1) % 3] {
                    poly.push(segment_sphere_crossing(&a, &b, c, r));
                }
            }
            polygon_area(&poly)
        }
    }
}

/// Point where segment a→b crosses the sphere |x − c| = r, assuming exactly
/// one endpoint lies inside.
fn segment_sphere_crossing(a: &Vec3, b: &Vec3, c: &Vec3, r: f64) -> Vec3 {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_squared();
    let qb = 2.0 * f.dot(&d);
    let qc = f.norm_squared() - r * r;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let t1 = (-qb - disc) / (2.0 * qa);
    let t2 = (-qb + disc) / (2.0 * qa);
    let t = if (0.0..=1.0).contains(&t1) && qc > 0.0 {
        t1
    } else {
        t2
    };
    a + d * t.clamp(0.0, 1.0)
}

fn polygon_area(poly: &[Vec3]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = Vec3::zeros();
    for k in 1..poly.len() - 1 {
        acc += (poly[k] - poly[0]).cross(&(poly[k + 1] - poly[0]));
    }
    0.5 * acc.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinker::canonical::{icosphere, make_canonical, plane_patch, CanonicalKind};
    use std::f64::consts::PI;

    #[test]
    fn genus_of_canonical_surfaces() {
        assert_eq!(
            genus(&make_canonical(CanonicalKind::Sphere, 2).unwrap()).unwrap(),
            0
        );
        assert_eq!(
            genus(&make_canonical(CanonicalKind::Plane, 1).unwrap()).unwrap(),
            0
        );
        // annulus: sphere with two disks removed
        assert_eq!(
            genus(&make_canonical(CanonicalKind::Cylinder, 1).unwrap()).unwrap(),
            0
        );
    }

    #[test]
    fn disk_area_in_plane() {
        let m = plane_patch(8.0, 64);
        let m = m.unwrap();
        for r in [1.0, 2.5, 5.0] {
            let ratio = area_growth_ratio(&m, &[Vec3::new(0.3, -0.2, 0.0)], &[r]).unwrap();
            assert!((ratio - PI).abs() < 2e-3 * PI, "r = {r}: {ratio}");
        }
    }

    #[test]
    fn whole_sphere_inside_large_balls() {
        let m = icosphere(2.0, 3).unwrap();
        let area = m.total_area();
        let ratio = area_growth_ratio(&m, &[Vec3::zeros()], &[3.0]).unwrap();
        assert!((ratio - area / 9.0).abs() < 1e-12);
        assert!((ratio - 16.0 * PI / 9.0).abs() < 0.02 * 16.0 * PI / 9.0);
        let far = area_growth_ratio(&m, &[Vec3::zeros()], &[100.0]).unwrap();
        assert!((far - area / 1e4).abs() < 1e-15);
    }

    #[test]
    fn tiny_ball_inside_one_triangle() {
        let m = TriMesh::new(
            vec![Vec3::zeros(), Vec3::x() * 10.0, Vec3::y() * 10.0],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let ratio = area_growth_ratio(&m, &[Vec3::new(2.0, 2.0, 0.0)], &[0.5]).unwrap();
        assert!((ratio - PI).abs() < 2e-3 * PI, "{ratio}");
    }

    #[test]
    fn empty_intersection_is_zero() {
        let m = icosphere(2.0, 1).unwrap();
        assert_eq!(
            area_growth_ratio(&m, &[Vec3::new(10.0, 0.0, 0.0)], &[1.0]).unwrap(),
            0.0
        );
        assert_eq!(area_growth_ratio(&m, &[], &[1.0]).unwrap(), 0.0);
        assert!(area_growth_ratio(&m, &[Vec3::zeros()], &[0.0]).is_err());
    }
}
