//! Per-vertex discrete geometry: normals, mean curvature, |A|², mixed
//! Voronoi areas and the Gaussian weight e^{−|x|²/4}.
//!
//! Sign conventions: the normal of a closed, consistently oriented mesh is the
//! side the triangle winding points to (outward for counter-clockwise faces),
//! and H = div n, so a round sphere of radius R carries H = 2/R.

use nalgebra::{Matrix2, SMatrix, SVector};

use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

/// How vertex normals are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalMethod {
    /// Normalised sum of incident triangle cross products.
    AreaWeighted,
    /// Incident face normals weighted by the corner angle.
    AngleWeighted,
    /// Area-weighted start, then tilted by the gradient of a 1-ring quadric fit.
    #[default]
    QuadricFit,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeometryOptions {
    pub normals: NormalMethod,
}

/// Cotangent edge weights stored per vertex in the order of
/// [`TriMesh::neighbors`].
#[derive(Debug, Clone)]
pub struct CotanWeights {
    offsets: Vec<usize>,
    weights: Vec<f64>,
}

impl CotanWeights {
    /// ½(cot α + cot β) for every neighbour of `v`.
    pub fn row(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub normal: Vec<Vec3>,
    pub mean_curvature: Vec<f64>,
    pub second_fund_norm_sq: Vec<f64>,
    pub vertex_area: Vec<f64>,
    pub gaussian_weight: Vec<f64>,
    pub(crate) cotan: CotanWeights,
}

impl SurfaceGeometry {
    pub fn cotan_weights(&self) -> &CotanWeights {
        &self.cotan
    }

    pub fn len(&self) -> usize {
        self.normal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normal.is_empty()
    }
}

/// e^{−|x|²/4}
pub fn gaussian_weight(x: &Vec3) -> f64 {
    (-x.norm_squared() / 4.0).exp()
}

pub fn compute_geometry(mesh: &TriMesh) -> Result<SurfaceGeometry> {
    compute_geometry_with(mesh, GeometryOptions::default())
}

pub fn compute_geometry_with(mesh: &TriMesh, options: GeometryOptions) -> Result<SurfaceGeometry> {
    let cotan = cotan_weights(mesh)?;
    let vertex_area = mixed_voronoi_areas(mesh);
    let n = mesh.vertex_count();

    let mut normal = match options.normals {
        NormalMethod::AngleWeighted => angle_weighted_normals(mesh),
        NormalMethod::AreaWeighted | NormalMethod::QuadricFit => area_weighted_normals(mesh),
    };

    let mut second_fund_norm_sq = vec![0.0; n];
    for v in 0..n {
        let fit = quadric_fit(mesh, v, &normal[v]);
        if let Some(fit) = fit {
            second_fund_norm_sq[v] = fit.norm_sq;
            if options.normals == NormalMethod::QuadricFit {
                normal[v] = fit.normal;
            }
        }
    }

    let mut mean_curvature = vec![0.0; n];
    for v in 0..n {
        let lap = laplacian_of_position(mesh, &cotan, &vertex_area, v);
        mean_curvature[v] = -lap.dot(&normal[v]);
    }

    let gaussian_weight = mesh.vertices().iter().map(gaussian_weight).collect();

    Ok(SurfaceGeometry {
        normal,
        mean_curvature,
        second_fund_norm_sq,
        vertex_area,
        gaussian_weight,
        cotan,
    })
}

/// Discrete Δx at `v`; equals −H n for a smooth surface.
pub(crate) fn laplacian_of_position(
    mesh: &TriMesh,
    cotan: &CotanWeights,
    area: &[f64],
    v: usize,
) -> Vec3 {
    let x = mesh.vertices()[v];
    let mut acc = Vec3::zeros();
    for (&j, &w) in mesh.neighbors(v).iter().zip(cotan.row(v)) {
        acc += w * (mesh.vertices()[j] - x);
    }
    acc / area[v]
}

fn cot(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b) / a.cross(b).norm()
}

pub(crate) fn cotan_weights(mesh: &TriMesh) -> Result<CotanWeights> {
    let n = mesh.vertex_count();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for v in 0..n {
        offsets.push(offsets[v] + mesh.neighbors(v).len());
    }
    let mut weights = vec![0.0; offsets[n]];
    let slot = |v: usize, j: usize| -> usize {
        let pos = mesh
            .neighbors(v)
            .binary_search(&j)
            .expect("edge endpoints are neighbours");
        offsets[v] + pos
    };
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        for k in 0..3 {
            // angle at corner k is opposite edge (k+1, k+2)
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let c = cot(&(p[(k + 1) % 3] - p[k]), &(p[(k + 2) % 3] - p[k]));
            if !c.is_finite() {
                return Err(Error::Degenerate {
                    triangle: t,
                    area: mesh.triangle_area(t),
                    threshold: 0.0,
                });
            }
            weights[slot(i, j)] += 0.5 * c;
            weights[slot(j, i)] += 0.5 * c;
        }
    }
    Ok(CotanWeights { offsets, weights })
}

/// Mixed Voronoi cell areas: Voronoi regions on non-obtuse triangles,
/// area/2 or area/4 splits on obtuse ones. They sum to the mesh area.
pub fn mixed_voronoi_areas(mesh: &TriMesh) -> Vec<f64> {
    let mut area = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let tri_area = mesh.triangle_area(t);
        let dots: [f64; 3] =
            std::array::from_fn(|k| (p[(k + 1) % 3] - p[k]).dot(&(p[(k + 2) % 3] - p[k])));
        if let Some(obtuse) = dots.iter().position(|&d| d < 0.0) {
            for k in 0..3 {
                area[tri[k]] += if k == obtuse {
                    tri_area / 2.0
                } else {
                    tri_area / 4.0
                };
            }
            continue;
        }
        for k in 0..3 {
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            let c = cot(&(p[a] - p[k]), &(p[b] - p[k]));
            // the edge opposite k contributes to both of its endpoints
            let len_sq = (p[b] - p[a]).norm_squared();
            area[tri[a]] += c * len_sq / 8.0;
            area[tri[b]] += c * len_sq / 8.0;
        }
    }
    area
}

pub fn area_weighted_normals(mesh: &TriMesh) -> Vec<Vec3> {
    let mut normal = vec![Vec3::zeros(); mesh.vertex_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let c = mesh.triangle_cross(t);
        for &v in tri {
            normal[v] += c;
        }
    }
    normal.iter_mut().for_each(|n| *n = n.normalize());
    normal
}

pub fn angle_weighted_normals(mesh: &TriMesh) -> Vec<Vec3> {
    let mut normal = vec![Vec3::zeros(); mesh.vertex_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let face = mesh.triangle_cross(t).normalize();
        for k in 0..3 {
            let angle = (p[(k + 1) % 3] - p[k]).angle(&(p[(k + 2) % 3] - p[k]));
            normal[tri[k]] += angle * face;
        }
    }
    normal.iter_mut().for_each(|n| *n = n.normalize());
    normal
}

/// Orthonormal tangent pair completing `n` to a right-handed frame.
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

pub(crate) struct QuadricFit {
    pub normal: Vec3,
    pub norm_sq: f64,
}

/// The 1-ring, widened to the 2-ring at boundary vertices where the 1-ring
/// lies on one side only.
fn fit_stencil(mesh: &TriMesh, v: usize) -> Vec<usize> {
    let mut ring = mesh.neighbors(v).to_vec();
    if mesh.is_boundary(v) {
        for &j in mesh.neighbors(v) {
            ring.extend(mesh.neighbors(j).iter().copied().filter(|&k| k != v));
        }
        ring.sort_unstable();
        ring.dedup();
    }
    ring
}

/// Least-squares height field h = a u² + b uv + c v² (+ d u + e v) over the
/// 1-ring, in the tangent frame of `n`. Returns the shape-operator norm and
/// the normal tilted by the fitted slope.
pub(crate) fn quadric_fit(mesh: &TriMesh, v: usize, n: &Vec3) -> Option<QuadricFit> {
    let ring = fit_stencil(mesh, v);
    let (t1, t2) = tangent_frame(n);
    let x = mesh.vertices()[v];
    let samples: Vec<(f64, f64, f64)> = ring
        .iter()
        .map(|&j| {
            let d = mesh.vertices()[j] - x;
            (d.dot(&t1), d.dot(&t2), d.dot(n))
        })
        .collect();

    let (hess, grad) = if samples.len() >= 5 {
        let mut ata = SMatrix::<f64, 5, 5>::zeros();
        let mut atb = SVector::<f64, 5>::zeros();
        for &(u, w, h) in &samples {
            let row = SVector::<f64, 5>::new(u * u, u * w, w * w, u, w);
            ata += row * row.transpose();
            atb += row * h;
        }
        let sol = ata.cholesky()?.solve(&atb);
        (
            Matrix2::new(2.0 * sol[0], sol[1], sol[1], 2.0 * sol[2]),
            nalgebra::Vector2::new(sol[3], sol[4]),
        )
    } else if samples.len() >= 3 {
        let mut ata = SMatrix::<f64, 3, 3>::zeros();
        let mut atb = SVector::<f64, 3>::zeros();
        for &(u, w, h) in &samples {
            let row = SVector::<f64, 3>::new(u * u, u * w, w * w);
            ata += row * row.transpose();
            atb += row * h;
        }
        let sol = ata.cholesky()?.solve(&atb);
        (
            Matrix2::new(2.0 * sol[0], sol[1], sol[1], 2.0 * sol[2]),
            nalgebra::Vector2::zeros(),
        )
    } else {
        return None;
    };

    // graph (u, v, h(u, v)): first form I = Id + g gᵀ, second form II = Hess/√(1+|g|²)
    let g2 = grad.norm_squared();
    let first = Matrix2::identity() + grad * grad.transpose();
    let second = hess / (1.0 + g2).sqrt();
    let shape = first.try_inverse()? * second;
    let norm_sq = (shape * shape).trace();
    let normal = (n - grad[0] * t1 - grad[1] * t2).normalize();
    Some(QuadricFit { normal, norm_sq })
}
