//! Mean curvature flow of triangle meshes and checks of the self-similar
//! shrinking picture M_t = √(−t) Σ.
//!
//! Boundary vertices of truncated meshes are held fixed. No remeshing and no
//! self-intersection detection is performed.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shrinker::residual::scaled_time_residual;
use crate::surface::distance::MeshDistance;
use crate::surface::geometry::{
    compute_geometry, cotan_weights, mixed_voronoi_areas, CotanWeights,
};
use crate::surface::io::write_off;
use crate::surface::mesh::{TriMesh, Vec3};

/// Default constant c in the explicit bound dt ≤ c · h_min².
pub const DEFAULT_STABILITY: f64 = 0.25;

/// Width of the boundary collar excluded from distance checks on truncated
/// meshes.
pub const BOUNDARY_COLLAR: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct FlowState {
    pub mesh: TriMesh,
    pub t: f64,
    pub step_count: usize,
}

impl FlowState {
    pub fn new(mesh: TriMesh, t: f64) -> Self {
        FlowState {
            mesh,
            t,
            step_count: 0,
        }
    }

    /// Largest explicit step allowed for the current mesh.
    pub fn stable_step(&self, stability: f64) -> f64 {
        let h = self.mesh.min_edge_length();
        stability * h * h
    }

    pub fn mean_radius(&self) -> f64 {
        let v = self.mesh.vertices();
        v.iter().map(|x| x.norm()).sum::<f64>() / v.len() as f64
    }

    pub fn centroid(&self) -> Vec3 {
        let v = self.mesh.vertices();
        v.iter().fold(Vec3::zeros(), |a, x| a + x) / v.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// x ← x − dt H n.
    #[default]
    Explicit,
    /// (A + dt C) x_new = A x_old with the cotangent matrix C and lumped
    /// areas A of the current mesh; no step bound.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub scheme: Scheme,
    pub stability: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            scheme: Scheme::Explicit,
            stability: DEFAULT_STABILITY,
        }
    }
}

pub fn mcf_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    mcf_step_with(state, dt, FlowOptions::default())
}

pub fn mcf_step_with(state: &FlowState, dt: f64, options: FlowOptions) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step {dt} must be positive"
        )));
    }
    let mesh = &state.mesh;
    let positions = match options.scheme {
        Scheme::Explicit => {
            let bound = state.stable_step(options.stability);
            if dt > bound {
                return Err(Error::Timestep { dt, bound });
            }
            let geom = compute_geometry(mesh)?;
            mesh.vertices()
                .iter()
                .enumerate()
                .map(|(v, x)| {
                    if mesh.is_boundary(v) {
                        *x
                    } else {
                        x - geom.normal[v] * (dt * geom.mean_curvature[v])
                    }
                })
                .collect()
        }
        Scheme::SemiImplicit => semi_implicit_positions(mesh, dt)?,
    };
    Ok(FlowState {
        mesh: mesh.with_positions(positions)?,
        t: state.t + dt,
        step_count: state.step_count + 1,
    })
}

/// Conjugate gradients on (A + dt C) restricted to interior vertices.
fn semi_implicit_positions(mesh: &TriMesh, dt: f64) -> Result<Vec<Vec3>> {
    let cotan = cotan_weights(mesh)?;
    let area = mixed_voronoi_areas(mesh);
    let n = mesh.vertex_count();
    let old = mesh.vertices();
    let apply = |x: &[Vec3]| -> Vec<Vec3> {
        (0..n)
            .map(|v| {
                if mesh.is_boundary(v) {
                    return x[v];
                }
                // A x − dt · A Δx, with Δ the cotangent Laplacian
                let lap = laplacian_of_position_of(mesh, &cotan, &area, x, v);
                x[v] * area[v] - lap * (dt * area[v])
            })
            .collect()
    };
    let rhs: Vec<Vec3> = (0..n)
        .map(|v| {
            if mesh.is_boundary(v) {
                old[v]
            } else {
                old[v] * area[v]
            }
        })
        .collect();
    // boundary rows are identity; starting from the old positions and
    // zeroing boundary residuals keeps those entries fixed
    let mut x = old.to_vec();
    let ax = apply(&x);
    let mut r: Vec<Vec3> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    for v in 0..n {
        if mesh.is_boundary(v) {
            r[v] = Vec3::zeros();
        }
    }
    let mut p = r.clone();
    let dot = |a: &[Vec3], b: &[Vec3]| -> f64 { a.iter().zip(b).map(|(x, y)| x.dot(y)).sum() };
    let mut rr = dot(&r, &r);
    let target = 1e-28 * dot(&rhs, &rhs).max(f64::MIN_POSITIVE);
    for _ in 0..10 * n {
        if rr <= target {
            break;
        }
        let mut ap = apply(&p);
        for v in 0..n {
            if mesh.is_boundary(v) {
                ap[v] = Vec3::zeros();
            }
        }
        let alpha = rr / dot(&p, &ap);
        for v in 0..n {
            x[v] += p[v] * alpha;
            r[v] -= ap[v] * alpha;
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for v in 0..n {
            p[v] = r[v] + p[v] * beta;
        }
    }
    if !(rr <= target.max(1e-24)) {
        return Err(Error::Solver(format!(
            "semi-implicit solve stalled at residual {:e}",
            rr.sqrt()
        )));
    }
    Ok(x)
}

fn laplacian_of_position_of(
    mesh: &TriMesh,
    cotan: &CotanWeights,
    area: &[f64],
    x: &[Vec3],
    v: usize,
) -> Vec3 {
    let mut acc = Vec3::zeros();
    for (&j, &w) in mesh.neighbors(v).iter().zip(cotan.row(v)) {
        acc += w * (x[j] - x[v]);
    }
    acc / area[v]
}

/// Explicit flow to `t_end` with steps of `fraction` of the stability bound,
/// the last one shortened to land on `t_end`.
pub fn flow_until(state: &FlowState, t_end: f64, fraction: f64) -> Result<FlowState> {
    flow_until_with(state, t_end, fraction, FlowOptions::default(), |_| Ok(()))
}

/// As [`flow_until`] with a callback after every step.
pub fn flow_until_with(
    state: &FlowState,
    t_end: f64,
    fraction: f64,
    options: FlowOptions,
    mut observe: impl FnMut(&FlowState) -> Result<()>,
) -> Result<FlowState> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "step fraction {fraction} must lie in (0, 1]"
        )));
    }
    if !(t_end > state.t) {
        return Err(Error::InvalidArgument(format!(
            "end time {t_end} must follow t = {}",
            state.t
        )));
    }
    let mut s = state.clone();
    while s.t < t_end {
        let dt = (fraction * s.stable_step(options.stability)).min(t_end - s.t);
        if !(dt > 0.0) {
            return Err(Error::Timestep { dt, bound: 0.0 });
        }
        let mut next = mcf_step_with(&s, dt, options)?;
        if t_end - next.t < 1e-14 * t_end.abs().max(1.0) {
            next.t = t_end;
        }
        s = next;
        observe(&s)?;
    }
    Ok(s)
}

/// ‖H + ⟨x, n⟩/(2t)‖_∞ over interior vertices of √(−t) Σ.
///
/// Σ is not required to be a shrinker; for one that is not, the value
/// measures how far √(−t) Σ is from the self-similar slice at time t.
pub fn selfsimilar_residual(sigma: &TriMesh, t: f64) -> Result<f64> {
    if !(t < 0.0) {
        return Err(Error::TimeDomain(t));
    }
    let scaled = sigma.scaled((-t).sqrt())?;
    let geom = compute_geometry(&scaled)?;
    Ok(scaled_time_residual(&scaled, &geom, t)?.norm_inf)
}

/// Flows √(−t0) Σ from t0 to t1 in `steps` equal explicit steps and returns
/// the symmetric vertex Hausdorff distance to √(−t1) Σ.
///
/// On truncated meshes a vertex is skipped when it lies within the collar of
/// its own boundary or when its nearest point on the other mesh lies within
/// the collar of that mesh's boundary.
pub fn rescaled_trajectory_check(sigma: &TriMesh, t0: f64, t1: f64, steps: usize) -> Result<f64> {
    if !(-1.0 <= t0 && t0 < t1 && t1 < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "times must satisfy -1 <= t0 < t1 < 0, got t0 = {t0}, t1 = {t1}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut state = FlowState::new(sigma.scaled((-t0).sqrt())?, t0);
    for _ in 0..steps {
        state = mcf_step(&state, dt)?;
    }
    let target = sigma.scaled((-t1).sqrt())?;
    Ok(collar_hausdorff(&state.mesh, &target, BOUNDARY_COLLAR))
}

fn collar_mask(mesh: &TriMesh, collar: f64) -> Vec<bool> {
    let boundary: Vec<Vec3> = (0..mesh.vertex_count())
        .filter(|&v| mesh.is_boundary(v))
        .map(|v| mesh.vertices()[v])
        .collect();
    mesh.vertices()
        .iter()
        .map(|x| boundary.iter().any(|b| (b - x).norm() < collar))
        .collect()
}

/// Symmetric Hausdorff distance over vertices with boundary collars removed.
pub fn collar_hausdorff(a: &TriMesh, b: &TriMesh, collar: f64) -> f64 {
    let one_way = |from: &TriMesh, to: &TriMesh| -> f64 {
        let skip_from = collar_mask(from, collar);
        let edge: Vec<Vec3> = (0..to.vertex_count())
            .filter(|&v| to.is_boundary(v))
            .map(|v| to.vertices()[v])
            .collect();
        let index = MeshDistance::new(to);
        let mut worst = 0.0f64;
        for (v, x) in from.vertices().iter().enumerate() {
            if skip_from[v] {
                continue;
            }
            let proj = index.project(x);
            if edge.iter().any(|b| (b - proj.point).norm() < collar) {
                continue;
            }
            worst = worst.max(proj.distance);
        }
        worst
    };
    one_way(a, b).max(one_way(b, a))
}

/// One entry of a trajectory manifest.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub step: usize,
    pub file: String,
    /// ‖H + ⟨x, n⟩/(2t)‖_∞ of the snapshot itself (null for t ≥ 0).
    pub residuals: Option<f64>,
}

/// Flows to `t_end`, writing `snapshot_0000.off`, … every `every` steps (and
/// at the end) plus `manifest.json` into `dir`.
pub fn write_trajectory(
    initial: &FlowState,
    t_end: f64,
    fraction: f64,
    every: usize,
    dir: impl AsRef<Path>,
) -> Result<(FlowState, Vec<SnapshotRecord>)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let every = every.max(1);
    let mut records = Vec::new();
    let save = |s: &FlowState, records: &mut Vec<SnapshotRecord>| -> Result<()> {
        let file = format!("snapshot_{:04}.off", records.len());
        write_off(dir.join(&file), &s.mesh)?;
        let residuals = if s.t < 0.0 {
            let geom = compute_geometry(&s.mesh)?;
            Some(scaled_time_residual(&s.mesh, &geom, s.t)?.norm_inf)
        } else {
            None
        };
        records.push(SnapshotRecord {
            t: s.t,
            step: s.step_count,
            file,
            residuals,
        });
        Ok(())
    };
    save(initial, &mut records)?;
    let last = flow_until_with(initial, t_end, fraction, FlowOptions::default(), |s| {
        if s.step_count % every == 0 {
            save(s, &mut records)?;
        }
        Ok(())
    })?;
    if last.step_count % every != 0 {
        save(&last, &mut records)?;
    }
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&records)? + "\n",
    )?;
    Ok((last, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinker::canonical::{icosphere, make_canonical, CanonicalKind};

    #[test]
    fn plane_is_stationary() {
        let m = make_canonical(CanonicalKind::Plane, 2).unwrap();
        let s = FlowState::new(m.clone(), -1.0);
        let dt = 0.5 * s.stable_step(DEFAULT_STABILITY);
        let next = mcf_step(&s, dt).unwrap();
        for (a, b) in next.mesh.vertices().iter().zip(m.vertices()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(next.step_count, 1);
        assert!(next.t > s.t);
    }

    #[test]
    fn oversized_step_is_refused() {
        let s = FlowState::new(icosphere(2.0, 2).unwrap(), -1.0);
        let bound = s.stable_step(DEFAULT_STABILITY);
        assert!(matches!(
            mcf_step(&s, 1.01 * bound),
            Err(Error::Timestep { .. })
        ));
        assert!(mcf_step(&s, -1e-3).is_err());
    }

    #[test]
    fn sphere_follows_the_shrinking_radius() {
        let s = FlowState::new(icosphere(2.0, 3).unwrap(), -1.0);
        let end = flow_until(&s, -0.25, 0.5).unwrap();
        assert!((end.t + 0.25).abs() < 1e-14);
        assert!(
            (end.mean_radius() - 1.0).abs() < 1e-2,
            "{}",
            end.mean_radius()
        );
    }

    #[test]
    fn sphere_shrinks_towards_the_origin() {
        // the discrete extinction time moves with h², so stop at R = √0.2
        let s = FlowState::new(icosphere(2.0, 3).unwrap(), -1.0);
        let end = flow_until(&s, -0.05, 0.5).unwrap();
        let r = end.mean_radius();
        assert!((r / 0.2f64.sqrt() - 1.0).abs() < 5e-2, "{r}");
        assert!(end.centroid().norm() < 1e-10);
    }

    #[test]
    fn semi_implicit_agrees_with_explicit() {
        let s = FlowState::new(icosphere(2.0, 2).unwrap(), -1.0);
        let opts = FlowOptions {
            scheme: Scheme::SemiImplicit,
            ..FlowOptions::default()
        };
        let big = mcf_step_with(&s, 0.05, opts).unwrap();
        // R² = 4 − 4·0.05 ⇒ R ≈ 1.949
        assert!(
            (big.mean_radius() - 3.8f64.sqrt()).abs() < 1e-2,
            "{}",
            big.mean_radius()
        );
        let fine = FlowState::new(icosphere(2.0, 3).unwrap(), -1.0);
        let end = flow_until_with(&fine, -0.25, 0.5, opts, |_| Ok(())).unwrap();
        assert!(
            (end.mean_radius() - 1.0).abs() < 2e-2,
            "{}",
            end.mean_radius()
        );
    }

    #[test]
    fn selfsimilar_residual_scales() {
        let m = make_canonical(CanonicalKind::Sphere, 3).unwrap();
        let base = selfsimilar_residual(&m, -1.0).unwrap();
        for t in [-4.0, -0.25] {
            let r = selfsimilar_residual(&m, t).unwrap();
            assert!(((-t).sqrt() * r - base).abs() < 1e-10 * base.max(1e-12));
        }
        assert!(matches!(
            selfsimilar_residual(&m, 0.0),
            Err(Error::TimeDomain(_))
        ));
        let unit = icosphere(1.0, 4).unwrap();
        assert!((selfsimilar_residual(&unit, -1.0).unwrap() - 1.5).abs() < 1e-2);
    }

    #[test]
    fn trajectory_check_on_canonical_surfaces() {
        let sphere = make_canonical(CanonicalKind::Sphere, 3).unwrap();
        let d = rescaled_trajectory_check(&sphere, -1.0, -0.5, 400).unwrap();
        assert!(d < 1e-2, "{d}");
        let plane = make_canonical(CanonicalKind::Plane, 2).unwrap();
        let steps = 50;
        let dp = rescaled_trajectory_check(&plane, -1.0, -0.5, steps).unwrap();
        assert!(dp < 1e-12, "{dp}");
        assert!(rescaled_trajectory_check(&plane, -1.0, 0.0, 10).is_err());
        // truncated cylinder, fixed ends hidden by the collar
        let cyl = make_canonical(CanonicalKind::Cylinder, 2).unwrap();
        let dc = rescaled_trajectory_check(&cyl, -1.0, -0.5, 105).unwrap();
        assert!(dc < 1e-2, "{dc}");
    }

    #[test]
    fn trajectory_files() {
        let dir = std::env::temp_dir().join(format!("flow-traj-{}", std::process::id()));
        let s = FlowState::new(icosphere(2.0, 1).unwrap(), -1.0);
        let (last, records) = write_trajectory(&s, -0.9, 0.5, 5, &dir).unwrap();
        assert_eq!(records.last().unwrap().step, last.step_count);
        assert!(dir.join("manifest.json").exists());
        assert!(dir.join(&records[1].file).exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
