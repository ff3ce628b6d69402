//! Spectrum of −L on a surface of revolution, one angular Fourier mode at a
//! time.
//!
//! For u(s) cos(kφ) on the surface swept by the profile (r(s), z(s)),
//!
//!   −L u = −(r ρ u')'/(r ρ) + (k²/r² − |A|² − ½) u,   ρ = e^{−(r² + z²)/4},
//!
//! with |A|² = κ² + sin²θ/r². The weak form uses quadratic elements, one per
//! profile segment, with the element midpoint taken from the cubic Hermite
//! interpolant of the profile. Geometry inside an element is isoparametric.
//! Open ends off the axis get a Dirichlet condition. Axis ends are natural
//! for k = 0 and Dirichlet for k ≥ 1.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::banded::SymBand;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::shrinker::profile::ProfileCurve;
use crate::surface::field::ScalarField;

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Largest accepted ‖K x − λ M x‖ for an M-normalised eigenvector, in
    /// the diagonally scaled variables.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra vectors carried by the subspace iteration.
    pub guard: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tolerance: 1e-10,
            max_iterations: 2000,
            guard: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub mode: u32,
    pub truncation: f64,
    /// Ascending eigenvalues of −L.
    pub eigenvalues: Vec<f64>,
    /// Nodal values on `nodes`, normalised in the weighted L² product.
    /// Written through `write_csv` rather than JSON.
    #[serde(skip)]
    pub eigenfunctions: Vec<ScalarField>,
    /// max |⟨φ_i, φ_j⟩ − δ_ij| in the weighted product.
    pub orthonormality_residual: f64,
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub nodes: ProfileCurve,
    #[serde(skip)]
    mass: SymBand,
    #[serde(skip)]
    order: Vec<usize>,
}

impl SpectrumResult {
    /// ∫ f g r e^{−(r² + z²)/4} ds for nodal vectors on `nodes`.
    pub fn weighted_inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        let n = self.order.len();
        for len in [f.len(), g.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let fp: Vec<f64> = self.order.iter().map(|&i| f[i]).collect();
        let gp: Vec<f64> = self.order.iter().map(|&i| g[i]).collect();
        Ok(self
            .mass
            .mul_vec(&fp)
            .iter()
            .zip(&gp)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Weighted L² distance between eigenfunction `index` and `target` after
    /// normalising `target` and matching its sign.
    pub fn eigenfunction_distance(&self, index: usize, target: &[f64]) -> Result<f64> {
        let phi = self
            .eigenfunctions
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("no eigenfunction {index}")))?;
        let norm = self.weighted_inner(target, target)?.sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument(
                "target has zero weighted norm".into(),
            ));
        }
        let sign = self.weighted_inner(phi.values(), target)?.signum();
        let diff: Vec<f64> = phi
            .values()
            .iter()
            .zip(target)
            .map(|(p, t)| p - sign * t / norm)
            .collect();
        Ok(self.weighted_inner(&diff, &diff)?.max(0.0).sqrt())
    }

    /// CSV with columns s, r, z, phi_0, phi_1, … over the nodes.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["s".to_string(), "r".into(), "z".into()];
        header.extend((0..self.eigenfunctions.len()).map(|i| format!("phi_{i}")));
        w.write_record(&header)?;
        let s = self.nodes.arclength();
        for (i, &[r, z]) in self.nodes.samples().iter().enumerate() {
            let mut row = vec![s[i].to_string(), r.to_string(), z.to_string()];
            row.extend(self.eigenfunctions.iter().map(|f| f[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn spectrum(
    profile: &ProfileCurve,
    k: u32,
    count: usize,
    truncation: f64,
) -> Result<SpectrumResult> {
    spectrum_with(profile, k, count, truncation, SpectrumOptions::default())
}

const QUADRATURE_ORDER: usize = 6;

/// Local 3×3 element matrix.
type Block = [[f64; 3]; 3];

pub fn spectrum_with(
    profile: &ProfileCurve,
    k: u32,
    count: usize,
    truncation: f64,
    options: SpectrumOptions,
) -> Result<SpectrumResult> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let open_end = !profile.is_closed() && !(profile.starts_on_axis() && profile.ends_on_axis());
    if open_end && !((-truncation * truncation / 4.0).exp() < 1e-10) {
        return Err(Error::InvalidArgument(format!(
            "truncation Z = {truncation} leaves Gaussian weight e^(-Z^2/4) above 1e-10"
        )));
    }
    let base = if profile.samples().iter().any(|p| p[1].abs() > truncation) {
        profile.truncated(truncation)?
    } else {
        profile.clone()
    };
    let nodes = base.refined()?;
    let closed = nodes.is_closed();
    let n_nodes = nodes.len();
    let elements = if closed {
        n_nodes / 2
    } else {
        (n_nodes - 1) / 2
    };

    let order = node_order(n_nodes, closed);
    let mut position = vec![0usize; n_nodes];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p;
    }
    let element_nodes = |e: usize| [2 * e, 2 * e + 1, (2 * e + 2) % n_nodes];
    let bw = (0..elements)
        .flat_map(|e| {
            let en = element_nodes(e);
            [(en[0], en[1]), (en[0], en[2]), (en[1], en[2])]
        })
        .map(|(a, b)| position[a].abs_diff(position[b]))
        .max()
        .unwrap_or(0);

    let (stiff, mass, max_a2) = assemble(&base, &nodes, k, &element_nodes, elements, &position, bw);

    let mut fixed = vec![false; n_nodes];
    if !closed {
        for end in [0, n_nodes - 1] {
            let on_axis = nodes.samples()[end][0] == 0.0;
            if !on_axis || k >= 1 {
                fixed[end] = true;
            }
        }
    }
    // free unknowns in band order
    let free: Vec<usize> = order.iter().copied().filter(|&i| !fixed[i]).collect();
    let dof = free.len();
    if dof < count {
        return Err(Error::InvalidArgument(format!(
            "only {dof} unknowns for {count} requested eigenvalues"
        )));
    }
    let scale: Vec<f64> = free
        .iter()
        .map(|&i| mass.get(position[i], position[i]).sqrt().recip())
        .collect();
    let reduce = |a: &SymBand| {
        let mut out = SymBand::zeros(dof, bw);
        for i in 0..dof {
            for j in i.saturating_sub(bw)..=i {
                let v = a.get(position[free[i]], position[free[j]]);
                out.set(i, j, v * scale[i] * scale[j]);
            }
        }
        out
    };
    let k_s = reduce(&stiff);
    let m_s = reduce(&mass);

    let shift = -max_a2 - 1.5;
    let mut shifted = k_s.clone();
    for i in 0..dof {
        for j in i.saturating_sub(bw)..=i {
            shifted.add(i, j, -shift * m_s.get(i, j));
        }
    }
    let factor = shifted.cholesky()?;

    let p = (count + options.guard).max(2 * count).min(dof);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ k as u64);
    let mut x = DMatrix::from_fn(dof, p, |_, _| rng.random_range(-1.0..1.0));
    let mut values = vec![0.0; p];
    let mut residuals = vec![f64::INFINITY; count];
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let mx = m_s.mul_mat(&x);
        let mut y = DMatrix::zeros(dof, p);
        for c in 0..p {
            let col: Vec<f64> = mx.column(c).iter().copied().collect();
            y.set_column(c, &DVector::from_vec(factor.cholesky_solve(&col)));
        }
        let q = y.qr().q();
        let kq = k_s.mul_mat(&q);
        let mq = m_s.mul_mat(&q);
        let kr = symmetrise(q.transpose() * &kq);
        let mr = symmetrise(q.transpose() * &mq);
        let chol = mr
            .cholesky()
            .ok_or_else(|| Error::Solver("projected mass matrix lost definiteness".into()))?;
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::Solver("projected mass factor is singular".into()))?;
        let c = symmetrise(&l_inv * kr * l_inv.transpose());
        let eig = SymmetricEigen::new(c);
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let basis = &q * l_inv.transpose();
        let kb = &kq * l_inv.transpose();
        let mb = &mq * l_inv.transpose();
        for (slot, &j) in idx.iter().enumerate() {
            let v = eig.eigenvectors.column(j);
            x.set_column(slot, &(&basis * v));
            values[slot] = eig.eigenvalues[j];
            if slot < count {
                let r = &kb * v - (&mb * v) * eig.eigenvalues[j];
                residuals[slot] = r.norm();
            }
        }
        if residuals.iter().all(|&r| r < options.tolerance) {
            break;
        }
    }
    if !residuals.iter().all(|&r| r < options.tolerance) {
        return Err(Error::Solver(format!(
            "subspace iteration did not converge in {iterations} iterations; residual norms {residuals:?}"
        )));
    }

    let mut eigenfunctions = Vec::with_capacity(count);
    for c in 0..count {
        let mut full = vec![0.0; n_nodes];
        for (i, &node) in free.iter().enumerate() {
            full[node] = x[(i, c)] * scale[i];
        }
        let peak = full
            .iter()
            .copied()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if peak < 0.0 {
            full.iter_mut().for_each(|v| *v = -*v);
        }
        eigenfunctions.push(ScalarField(full));
    }
    let mut result = SpectrumResult {
        mode: k,
        truncation,
        eigenvalues: values[..count].to_vec(),
        eigenfunctions,
        orthonormality_residual: 0.0,
        residual_norms: residuals,
        iterations,
        nodes,
        mass,
        order,
    };
    let mut worst = 0.0f64;
    for i in 0..count {
        for j in 0..=i {
            let g = result.weighted_inner(
                result.eigenfunctions[i].values(),
                result.eigenfunctions[j].values(),
            )?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    result.orthonormality_residual = worst;
    Ok(result)
}

fn symmetrise(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// Band ordering: natural for open curves, interleaved from both ends for
/// closed ones so the wrap-around element stays inside a narrow band.
fn node_order(n: usize, closed: bool) -> Vec<usize> {
    if !closed {
        return (0..n).collect();
    }
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo <= hi {
        out.push(lo);
        if hi != lo {
            out.push(hi);
        }
        lo += 1;
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    out
}

/// κ and sin θ / r on the refined nodes. Sample values come from the
/// unrefined curve (the umbilic limit κ on the axis); midpoints average
/// their two neighbours.
fn nodal_curvatures(base: &ProfileCurve) -> (Vec<f64>, Vec<f64>) {
    let (theta, kappa) = base.tangent_and_curvature();
    let pts = base.samples();
    let rot: Vec<f64> = pts
        .iter()
        .zip(theta.iter().zip(&kappa))
        .map(|(p, (t, k))| if p[0] == 0.0 { *k } else { t.sin() / p[0] })
        .collect();
    let n = pts.len();
    let segments = if base.is_closed() { n } else { n - 1 };
    let mut k_out = Vec::with_capacity(2 * n);
    let mut r_out = Vec::with_capacity(2 * n);
    for i in 0..segments {
        let j = (i + 1) % n;
        k_out.extend([kappa[i], 0.5 * (kappa[i] + kappa[j])]);
        r_out.extend([rot[i], 0.5 * (rot[i] + rot[j])]);
    }
    if !base.is_closed() {
        k_out.push(kappa[n - 1]);
        r_out.push(rot[n - 1]);
    }
    (k_out, r_out)
}

fn shape(xi: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
        [xi - 0.5, -2.0 * xi, xi + 0.5],
    )
}

/// Stiffness, mass and the largest |A|² at any quadrature point.
fn assemble(
    base: &ProfileCurve,
    nodes: &ProfileCurve,
    k: u32,
    element_nodes: &dyn Fn(usize) -> [usize; 3],
    elements: usize,
    position: &[usize],
    bw: usize,
) -> (SymBand, SymBand, f64) {
    let n = nodes.len();
    let pts = nodes.samples();
    let (kappa, rotational) = nodal_curvatures(base);
    let (gx, gw) = gauss_legendre(QUADRATURE_ORDER);
    let k2 = (k * k) as f64;

    let local: Vec<(Block, Block, f64)> = (0..elements)
        .map(|e| {
            let en = element_nodes(e);
            let mut ke = [[0.0; 3]; 3];
            let mut me = [[0.0; 3]; 3];
            let mut a2_max = 0.0f64;
            for (&xi, &w) in gx.iter().zip(&gw) {
                let (nv, dn) = shape(xi);
                let mut r = 0.0;
                let mut z = 0.0;
                let mut dr = 0.0;
                let mut dz = 0.0;
                let mut kap = 0.0;
                let mut rot = 0.0;
                for a in 0..3 {
                    let [ra, za] = pts[en[a]];
                    r += nv[a] * ra;
                    z += nv[a] * za;
                    dr += dn[a] * ra;
                    dz += dn[a] * za;
                    kap += nv[a] * kappa[en[a]];
                    rot += nv[a] * rotational[en[a]];
                }
                let jac = dr.hypot(dz);
                let a2 = kap * kap + rot * rot;
                a2_max = a2_max.max(a2);
                let measure = w * jac * r * (-(r * r + z * z) / 4.0).exp();
                let potential = k2 / (r * r) - a2 - 0.5;
                for a in 0..3 {
                    for b in 0..3 {
                        let grad = dn[a] * dn[b] / (jac * jac);
                        ke[a][b] += (grad + potential * nv[a] * nv[b]) * measure;
                        me[a][b] += nv[a] * nv[b] * measure;
                    }
                }
            }
            (ke, me, a2_max)
        })
        .collect();

    let mut stiff = SymBand::zeros(n, bw);
    let mut mass = SymBand::zeros(n, bw);
    let mut a2_max = 0.0f64;
    for (e, (ke, me, a2)) in local.iter().enumerate() {
        let en = element_nodes(e);
        a2_max = a2_max.max(*a2);
        for a in 0..3 {
            for b in 0..=a {
                let (i, j) = (position[en[a]], position[en[b]]);
                if a == b {
                    stiff.add(i, i, ke[a][a]);
                    mass.add(i, i, me[a][a]);
                } else {
                    stiff.add(i, j, ke[a][b]);
                    mass.add(i, j, me[a][b]);
                }
            }
        }
    }
    (stiff, mass, a2_max)
}

/// One eigenvalue of the combined spectrum with the Fourier mode it came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeEigenvalue {
    pub value: f64,
    pub mode: u32,
}

/// Lowest `count` eigenvalues over the given Fourier modes. Modes k ≥ 1 carry
/// cos kφ and sin kφ and are counted twice. Each mode is solved on its own
/// thread.
pub fn spectrum_modes(
    profile: &ProfileCurve,
    modes: &[u32],
    count: usize,
    truncation: f64,
) -> Result<Vec<ModeEigenvalue>> {
    let results: Vec<Result<SpectrumResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = modes
            .iter()
            .map(|&k| scope.spawn(move || spectrum(profile, k, count, truncation)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Solver("eigensolve thread panicked".into())))
            })
            .collect()
    });
    let mut all = Vec::new();
    for r in results {
        let r = r?;
        let copies = if r.mode == 0 { 1 } else { 2 };
        for &value in &r.eigenvalues {
            for _ in 0..copies {
                all.push(ModeEigenvalue {
                    value,
                    mode: r.mode,
                });
            }
        }
    }
    all.sort_by(|a, b| a.value.total_cmp(&b.value));
    all.truncate(count);
    Ok(all)
}
