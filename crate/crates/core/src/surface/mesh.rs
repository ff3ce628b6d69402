use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Triangles smaller than this fraction of the mean triangle area are rejected.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-12;

/// An undirected mesh edge with one (boundary) or two incident triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub triangles: [usize; 2],
    pub is_boundary: bool,
}

/// Oriented, manifold triangle mesh embedded in R³.
///
/// Construction validates the topology once; positions can later be replaced
/// through [`TriMesh::with_positions`] without re-deriving connectivity.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    edges: Vec<Edge>,
    vertex_triangles: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    boundary_loops: usize,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex outside 0..{nv}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
        }

        let mut directed: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(triangles.len() * 3);
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if let Some(other) = directed.insert((a, b), t) {
                    return Err(Error::Orientation(format!(
                        "directed edge ({a}, {b}) is used by triangles {other} and {t}"
                    )));
                }
            }
        }

        let mut edges = Vec::with_capacity(triangles.len() * 3 / 2 + 1);
        let mut undirected: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(triangles.len() * 3 / 2 + 1);
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match undirected.get(&key) {
                    Some(&e) => {
                        let edge: &mut Edge = &mut edges[e];
                        if !edge.is_boundary {
                            return Err(Error::NonManifold(format!(
                                "edge ({a}, {b}) has more than two incident triangles"
                            )));
                        }
                        edge.triangles[1] = t;
                        edge.is_boundary = false;
                    }
                    None => {
                        undirected.insert(key, edges.len());
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            triangles: [t, usize::MAX],
                            is_boundary: true,
                        });
                    }
                }
            }
        }
        // A shared edge traversed in the same direction twice was caught above,
        // so every interior edge here has opposite traversals.

        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_triangles[v].push(t);
            }
        }
        if let Some(v) = vertex_triangles.iter().position(|ts| ts.is_empty()) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not used by any triangle"
            )));
        }

        let mut neighbors = vec![Vec::new(); nv];
        let mut boundary = vec![false; nv];
        let mut boundary_degree = vec![0usize; nv];
        for e in &edges {
            let [a, b] = e.vertices;
            neighbors[a].push(b);
            neighbors[b].push(a);
            if e.is_boundary {
                boundary[a] = true;
                boundary[b] = true;
                boundary_degree[a] += 1;
                boundary_degree[b] += 1;
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        if let Some(v) = boundary_degree.iter().position(|&d| d != 0 && d != 2) {
            return Err(Error::NonManifold(format!(
                "vertex {v} touches {} boundary edges",
                boundary_degree[v]
            )));
        }

        let boundary_loops = count_boundary_loops(&triangles, &directed);

        let mesh = TriMesh {
            vertices,
            triangles,
            boundary,
            edges,
            vertex_triangles,
            neighbors,
            boundary_loops,
        };
        mesh.check_degenerate()?;
        Ok(mesh)
    }

    fn check_degenerate(&self) -> Result<()> {
        let areas: Vec<f64> = (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        let threshold = DEGENERATE_AREA_FRACTION * mean;
        if !mean.is_finite() {
            return Err(Error::InvalidMesh("non-finite vertex coordinates".into()));
        }
        match areas.iter().position(|&a| !(a > threshold)) {
            Some(t) => Err(Error::Degenerate {
                triangle: t,
                area: areas[t],
                threshold,
            }),
            None => Ok(()),
        }
    }

    /// Same connectivity, new vertex positions.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::LengthMismatch {
                expected: self.vertices.len(),
                found: vertices.len(),
            });
        }
        let mesh = TriMesh {
            vertices,
            ..self.clone()
        };
        mesh.check_degenerate()?;
        Ok(mesh)
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_positions(self.vertices.iter().map(|p| p * factor).collect())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops == 0
    }

    pub fn boundary_loop_count(&self) -> usize {
        self.boundary_loops
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Sorted one-ring neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.boundary[v])
    }

    pub fn triangle_points(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Area-weighted normal (cross product, length = 2·area).
    pub fn triangle_cross(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_cross(t).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| (self.vertices[e.vertices[0]] - self.vertices[e.vertices[1]]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| (self.vertices[e.vertices[0]] - self.vertices[e.vertices[1]]).norm())
            .fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|e| (self.vertices[e.vertices[0]] - self.vertices[e.vertices[1]]).norm())
            .sum();
        total / self.edges.len() as f64
    }

    /// Euler characteristic V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Keeps the triangles selected by `keep`, dropping vertices that become unused.
    pub fn submesh(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if !keep(t) {
                continue;
            }
            let mut out = [0; 3];
            for (k, &v) in tri.iter().enumerate() {
                if remap[v] == usize::MAX {
                    remap[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                }
                out[k] = remap[v];
            }
            triangles.push(out);
        }
        TriMesh::new(vertices, triangles)
    }
}

fn count_boundary_loops(
    triangles: &[[usize; 3]],
    directed: &HashMap<(usize, usize), usize>,
) -> usize {
    // Boundary half-edges are those whose twin is missing; on a manifold each
    // boundary vertex starts exactly one of them.
    let mut next: HashMap<usize, usize> = HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if !directed.contains_key(&(b, a)) {
                next.insert(a, b);
            }
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut visited = std::collections::HashSet::new();
    let mut loops = 0;
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        loops += 1;
        let mut v = start;
        while visited.insert(v) {
            v = next[&v];
        }
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> (Vec<Vec3>, Vec<[usize; 3]>) {
        let v = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        (v, t)
    }

    #[test]
    fn tetrahedron_is_closed_sphere() {
        let (v, t) = tetra();
        let m = TriMesh::new(v, t).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.edges().len(), 6);
        assert!(m.boundary_flags().iter().all(|b| !b));
    }

    #[test]
    fn flipped_triangle_is_orientation_error() {
        let (v, mut t) = tetra();
        t[3] = [1, 2, 3];
        assert!(matches!(TriMesh::new(v, t), Err(Error::Orientation(_))));
    }

    #[test]
    fn three_triangles_on_an_edge_is_non_manifold() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let t = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        let err = TriMesh::new(v, t).unwrap_err();
        assert!(matches!(err, Error::Orientation(_) | Error::NonManifold(_)));
    }

    #[test]
    fn collapsed_triangle_is_degenerate() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let t = vec![[0, 1, 2], [0, 3, 1]];
        assert!(matches!(
            TriMesh::new(v, t),
            Err(Error::Degenerate { triangle: 1, .. })
        ));
    }

    #[test]
    fn single_triangle_has_one_boundary_loop() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        let m = TriMesh::new(v, vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.boundary_loop_count(), 1);
        assert!(m.boundary_flags().iter().all(|&b| b));
    }
}
