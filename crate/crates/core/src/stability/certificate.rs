//! Cutoff instability certificate.
//!
//! With v = ⟨n(p), n⟩ (so Lv = ½v) and η a radial cutoff equal to one on B_R
//! and falling linearly to zero on B_{R+1}, the function u = ηv satisfies
//!
//!   Q(u) = ∫ |∇η|² v² e^{−|x|²/4} − ½ ∫ η² v² e^{−|x|²/4}
//!        ≤ ∫_{Σ∖B_R} v² e^{−|x|²/4} − ½ ∫_{B_R∩Σ} v² e^{−|x|²/4}.
//!
//! A negative right-hand side exhibits a compactly supported u with Q(u) < 0.

use serde::Serialize;
use statrs::function::erf::{erf, erfc};
use std::f64::consts::{E, PI, SQRT_2};

use super::form::quadratic_form;
use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;
use crate::surface::field::ScalarField;
use crate::surface::geometry::SurfaceGeometry;
use crate::surface::mesh::{TriMesh, Vec3};

/// Plane z = 0, sphere of radius 2 and cylinder of radius √2 about the
/// z-axis are evaluated in closed form or by 1-D quadrature; by symmetry the
/// result does not depend on the base point there.
#[derive(Debug, Clone, Copy)]
pub enum CertificateModel<'a> {
    Plane,
    Sphere,
    Cylinder,
    Mesh {
        mesh: &'a TriMesh,
        geom: &'a SurfaceGeometry,
        /// Base point p; the vertex nearest to it supplies n(p). Defaults to
        /// the vertex nearest the origin.
        base: Option<Vec3>,
    },
}

impl CertificateModel<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateModel::Plane => "plane",
            CertificateModel::Sphere => "sphere",
            CertificateModel::Cylinder => "cylinder",
            CertificateModel::Mesh { .. } => "mesh",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateReport {
    #[serde(rename = "R")]
    pub radius: f64,
    pub tail_term: f64,
    pub core_term: f64,
    /// tail_term − core_term.
    pub bound: f64,
    pub form_value: f64,
}

/// Linear cutoff: 1 on [0, R], R + 1 − ρ on [R, R + 1], 0 beyond.
pub fn cutoff(rho: f64, radius: f64) -> f64 {
    (radius + 1.0 - rho).clamp(0.0, 1.0)
}

pub fn instability_certificate(
    model: CertificateModel<'_>,
    radius: f64,
) -> Result<CertificateReport> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cutoff radius {radius} must be positive"
        )));
    }
    let (tail, core, form) = match model {
        CertificateModel::Plane => plane(radius),
        CertificateModel::Sphere => sphere(radius),
        CertificateModel::Cylinder => cylinder(radius),
        CertificateModel::Mesh { mesh, geom, base } => on_mesh(mesh, geom, base, radius)?,
    };
    Ok(CertificateReport {
        radius,
        tail_term: tail,
        core_term: core,
        bound: tail - core,
        form_value: form,
    })
}

const PANELS: usize = 16;

fn plane(radius: f64) -> (f64, f64, f64) {
    let g = (-radius * radius / 4.0).exp();
    let tail = 4.0 * PI * g;
    let core = 2.0 * PI * (1.0 - g);
    // on [0, R] the integrand is −½ r e^{−r²/4}; the ramp is integrated numerically
    let ramp = CompositeRule::new(radius, radius + 1.0, PANELS, 20).integrate(|r| {
        let eta = cutoff(r, radius);
        (1.0 - 0.5 * eta * eta) * r * (-r * r / 4.0).exp()
    });
    let form = 2.0 * PI * (ramp - (1.0 - g));
    (tail, core, form)
}

/// ∫_Σ v² e^{−|x|²/4} on the radius-2 sphere: e^{−1} · (1/3) · 16π.
fn sphere_mass() -> f64 {
    16.0 * PI / (3.0 * E)
}

fn sphere(radius: f64) -> (f64, f64, f64) {
    let mass = sphere_mass();
    let (tail, core) = if radius >= 2.0 {
        (0.0, 0.5 * mass)
    } else {
        (mass, 0.0)
    };
    // |x| is constant on Σ, so η is constant and ∇η vanishes
    let eta = cutoff(2.0, radius);
    (tail, core, -0.5 * eta * eta * mass)
}

fn cylinder(radius: f64) -> (f64, f64, f64) {
    // v = cos(φ − φ₀), area element √2 dφ dz, weight e^{−½} e^{−z²/4}
    let k = SQRT_2 * PI * (-0.5f64).exp();
    let a = (radius * radius - 2.0).max(0.0).sqrt();
    let b = ((radius + 1.0).powi(2) - 2.0).max(0.0).sqrt();
    let tail = k * 2.0 * PI.sqrt() * erfc(a / 2.0);
    let core = 0.5 * k * 2.0 * PI.sqrt() * erf(a / 2.0);
    let integrand = |z: f64| {
        let rho = (2.0 + z * z).sqrt();
        let eta = cutoff(rho, radius);
        let slope = if rho > radius && rho < radius + 1.0 {
            z / rho
        } else {
            0.0
        };
        (slope * slope - 0.5 * eta * eta) * (-z * z / 4.0).exp()
    };
    let half = if b > 0.0 {
        CompositeRule::with_breaks(0.0, b, &[a], PANELS, 20).integrate(integrand)
    } else {
        0.0
    };
    (tail, core, 2.0 * k * half)
}

fn nearest_vertex(mesh: &TriMesh, p: &Vec3) -> usize {
    mesh.vertices()
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - p)
                .norm_squared()
                .total_cmp(&(b.1 - p).norm_squared())
        })
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn on_mesh(
    mesh: &TriMesh,
    geom: &SurfaceGeometry,
    base: Option<Vec3>,
    radius: f64,
) -> Result<(f64, f64, f64)> {
    let p = base.unwrap_or_else(Vec3::zeros);
    let np = geom.normal[nearest_vertex(mesh, &p)];
    let mut tail = 0.0;
    let mut core = 0.0;
    let mut u = Vec::with_capacity(mesh.vertex_count());
    for (i, x) in mesh.vertices().iter().enumerate() {
        let v = np.dot(&geom.normal[i]);
        let m = v * v * geom.gaussian_weight[i] * geom.vertex_area[i];
        let rho = x.norm();
        if rho > radius {
            tail += m;
        } else {
            core += 0.5 * m;
        }
        u.push(cutoff(rho, radius) * v);
    }
    let form = quadratic_form(mesh, geom, &ScalarField(u))?.value;
    Ok((tail, core, form))
}

/// Smallest R in [lo, hi] with a negative bound, to within `tol`, by
/// bisection on the sign of the bound (non-increasing in R).
pub fn certificate_threshold(
    model: CertificateModel<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let b_lo = instability_certificate(model, lo)?.bound;
    let b_hi = instability_certificate(model, hi)?.bound;
    if !(b_lo >= 0.0 && b_hi < 0.0) {
        return Err(Error::Bracket {
            lo,
            hi,
            g_lo: b_lo,
            g_hi: b_hi,
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if instability_certificate(model, mid)?.bound < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
