use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

/// Scalar curvature of e^{−|x|²/2n} δ on R^{n+1} at |x| = ρ:
/// e^{ρ²/2n}(n + 1 − (n − 1)ρ²/4n).
pub fn conformal_scalar_curvature(n: u32, rho: f64) -> f64 {
    let n = n as f64;
    (rho * rho / (2.0 * n)).exp() * (n + 1.0 - (n - 1.0) * rho * rho / (4.0 * n))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConformalReport {
    pub n: u32,
    /// The scalar curvature is positive inside this radius and negative outside.
    pub sign_change_radius: f64,
    /// Length of a ray from the origin to infinity, ∫₀^∞ e^{−t²/4n} dt.
    pub distance_to_infinity: f64,
}

impl ConformalReport {
    pub fn scalar_curvature_at(&self, rho: f64) -> f64 {
        conformal_scalar_curvature(self.n, rho)
    }
}

pub fn conformal_report(n: u32) -> Result<ConformalReport> {
    if n < 2 {
        return Err(Error::Dimension(n as usize));
    }
    let nf = n as f64;
    // e^{−t²/4n} < e^{−50} beyond t = √(200n)
    let end = (200.0 * nf).sqrt();
    let distance = CompositeRule::new(0.0, end, 32, 20).integrate(|t| (-t * t / (4.0 * nf)).exp());
    Ok(ConformalReport {
        n,
        sign_change_radius: (4.0 * nf * (nf + 1.0) / (nf - 1.0)).sqrt(),
        distance_to_infinity: distance,
    })
}
