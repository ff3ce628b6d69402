use serde::Serialize;

use crate::error::Result;
use crate::surface::field::OperatorField;
use crate::surface::geometry::SurfaceGeometry;
use crate::surface::mesh::TriMesh;

/// Pointwise H − ⟨x, n⟩/2 with norms over interior vertices.
#[derive(Debug, Clone)]
pub struct ShrinkerResidual {
    pub pointwise: OperatorField,
    pub norm_inf: f64,
    /// (Σ r² · area · e^{−|x|²/4})^{1/2} over interior vertices.
    pub norm_l2_weighted: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualNorms {
    pub norm_inf: f64,
    pub norm_l2_weighted: f64,
}

impl ShrinkerResidual {
    pub fn norms(&self) -> ResidualNorms {
        ResidualNorms {
            norm_inf: self.norm_inf,
            norm_l2_weighted: self.norm_l2_weighted,
        }
    }
}

pub fn residual(mesh: &TriMesh, geom: &SurfaceGeometry) -> Result<ShrinkerResidual> {
    scaled_time_residual(mesh, geom, -1.0)
}

/// H + ⟨x, n⟩/(2t); t = −1 is the shrinker equation itself.
pub(crate) fn scaled_time_residual(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    t: f64,
) -> Result<ShrinkerResidual> {
    let values: Vec<f64> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, x)| geom.mean_curvature[v] + x.dot(&geom.normal[v]) / (2.0 * t))
        .collect();
    let mut norm_inf = 0.0f64;
    let mut l2 = 0.0;
    for v in mesh.interior_vertices() {
        norm_inf = norm_inf.max(values[v].abs());
        l2 += values[v] * values[v] * geom.vertex_area[v] * geom.gaussian_weight[v];
    }
    Ok(ShrinkerResidual {
        pointwise: OperatorField::new(values, mesh),
        norm_inf,
        norm_l2_weighted: l2.sqrt(),
    })
}
