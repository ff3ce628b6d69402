//! Point-to-mesh distances.

use rstar::primitives::GeomWithData;
use rstar::RTree;

use super::mesh::{TriMesh, Vec3};

/// Closest point to `p` on triangle (a, b, c) (Ericson, Real-Time Collision
/// Detection, §5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

type IndexedPoint = GeomWithData<[f64; 3], usize>;

/// Nearest-point queries against a fixed triangle mesh.
pub struct MeshDistance<'a> {
    mesh: &'a TriMesh,
    tree: RTree<IndexedPoint>,
    max_edge: f64,
}

/// Closest point on the mesh and the triangle it lies on.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub point: Vec3,
    pub distance: f64,
    pub triangle: usize,
}

impl<'a> MeshDistance<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let points = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| IndexedPoint::new([v.x, v.y, v.z], i))
            .collect();
        MeshDistance {
            mesh,
            tree: RTree::bulk_load(points),
            max_edge: mesh.max_edge_length(),
        }
    }

    /// Exact closest point: the nearest vertex bounds the search radius, and
    /// any triangle holding a closer point has all its corners within that
    /// radius plus the longest edge.
    pub fn project(&self, p: &Vec3) -> Projection {
        let q = [p.x, p.y, p.z];
        let nearest = self.tree.nearest_neighbor(&q).expect("mesh has vertices");
        let bound = (self.mesh.vertices()[nearest.data] - p).norm() + self.max_edge;
        let mut best = Projection {
            point: self.mesh.vertices()[nearest.data],
            distance: f64::INFINITY,
            triangle: self.mesh.vertex_triangles(nearest.data)[0],
        };
        let mut candidates: Vec<usize> = self
            .tree
            .locate_within_distance(q, bound * bound)
            .flat_map(|v| self.mesh.vertex_triangles(v.data).iter().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for t in candidates {
            let [a, b, c] = self.mesh.triangle_points(t);
            let cp = closest_point_on_triangle(p, &a, &b, &c);
            let d = (cp - p).norm();
            if d < best.distance {
                best = Projection {
                    point: cp,
                    distance: d,
                    triangle: t,
                };
            }
        }
        best
    }
}
