//! The three simplest self-shrinkers in R³ as triangle meshes: the plane
//! through the origin, the sphere of radius 2 and the cylinder of radius √2.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::{revolve, ProfileCurve};
use crate::error::{Error, Result};
use crate::surface::mesh::{TriMesh, Vec3};

pub const SPHERE_RADIUS: f64 = 2.0;
pub const CYLINDER_RADIUS: f64 = std::f64::consts::SQRT_2;
/// Half-width of the square plane patch and half-length of the cylinder.
pub const TRUNCATION_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalKind {
    Plane,
    Sphere,
    Cylinder,
}

impl CanonicalKind {
    pub const ALL: [CanonicalKind; 3] = [
        CanonicalKind::Plane,
        CanonicalKind::Sphere,
        CanonicalKind::Cylinder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalKind::Plane => "plane",
            CanonicalKind::Sphere => "sphere",
            CanonicalKind::Cylinder => "cylinder",
        }
    }
}

impl fmt::Display for CanonicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(CanonicalKind::Plane),
            "sphere" => Ok(CanonicalKind::Sphere),
            "cylinder" => Ok(CanonicalKind::Cylinder),
            other => Err(Error::InvalidArgument(format!(
                "unknown canonical surface '{other}'"
            ))),
        }
    }
}

/// Canonical shrinker mesh at refinement level `resolution` (≥ 1).
///
/// * sphere: icosphere of radius 2 after `resolution` midpoint subdivisions;
/// * plane: square patch of half-width 8 in z = 0 with 8·2^resolution cells per side;
/// * cylinder: radius √2, half-length 8, 8·2^resolution vertices per ring,
///   near-equilateral triangles; the open ends are boundary.
pub fn make_canonical(kind: CanonicalKind, resolution: u32) -> Result<TriMesh> {
    if resolution < 1 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 1".into(),
        ));
    }
    if resolution > 8 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} is too large"
        )));
    }
    match kind {
        CanonicalKind::Sphere => icosphere(SPHERE_RADIUS, resolution),
        CanonicalKind::Plane => plane_patch(TRUNCATION_HALF_WIDTH, 8 << resolution),
        CanonicalKind::Cylinder => {
            cylinder(CYLINDER_RADIUS, TRUNCATION_HALF_WIDTH, 8 << resolution)
        }
    }
}

/// Icosahedron subdivided `levels` times with vertices projected to the sphere.
pub fn icosphere(radius: f64, levels: u32) -> Result<TriMesh> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    TriMesh::new(verts.into_iter().map(|v| v * radius).collect(), tris)
}

/// Square [−h, h]² in z = 0 split into `cells`² squares, each cut along the
/// same diagonal; counter-clockwise winding gives the normal +e₃.
pub fn plane_patch(half_width: f64, cells: usize) -> Result<TriMesh> {
    let n = cells + 1;
    let step = 2.0 * half_width / cells as f64;
    let mut verts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            verts.push(Vec3::new(
                -half_width + i as f64 * step,
                -half_width + j as f64 * step,
                0.0,
            ));
        }
    }
    let mut tris = Vec::with_capacity(2 * cells * cells);
    for j in 0..cells {
        for i in 0..cells {
            let a = j * n + i;
            let (b, c, d) = (a + 1, a + n + 1, a + n);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriMesh::new(verts, tris)
}

/// Open cylinder about the z-axis with `ring` vertices per ring and axial
/// spacing chosen for near-equilateral triangles.
pub fn cylinder(radius: f64, half_length: f64, ring: usize) -> Result<TriMesh> {
    let chord = 2.0 * radius * (std::f64::consts::PI / ring as f64).sin();
    let spacing = chord * 3f64.sqrt() / 2.0;
    let intervals = ((2.0 * half_length / spacing).round() as usize).max(2);
    let profile = ProfileCurve::cylinder(radius, half_length, intervals + 1)?;
    revolve(&profile, ring)
}
