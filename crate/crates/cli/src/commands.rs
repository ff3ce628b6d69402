//! One function per experiment. Each writes its CSV detail files and returns
//! the JSON result together with the checked records.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use shrinklab_core::flow::{
    flow_until, rescaled_trajectory_check, selfsimilar_residual, write_trajectory, FlowState,
    DEFAULT_STABILITY,
};
use shrinklab_core::functional::{
    canonical_f, conformal_report, conformal_scalar_curvature, f_value, fd_variation_check,
    first_variation, truncation_tail, VariationField,
};
use shrinklab_core::report::Record;
use shrinklab_core::shrinker::canonical::{make_canonical, CanonicalKind};
use shrinklab_core::shrinker::profile::{revolve, ProfileCurve};
use shrinklab_core::shrinker::residual::residual;
use shrinklab_core::shrinker::shooting::{shoot_closed_profile, ShootingOptions};
use shrinklab_core::stability::{
    certificate_threshold, instability_certificate, spectrum, spectrum_modes, CertificateModel,
    CertificateReport,
};
use shrinklab_core::surface::diagnostics::genus;
use shrinklab_core::surface::field::{smooth_random_field, write_field_csv};
use shrinklab_core::surface::geometry::compute_geometry;
use shrinklab_core::surface::io::{read_off, write_off};
use shrinklab_core::surface::mesh::TriMesh;
use shrinklab_core::surface::Vec3;

use crate::config::{RunConfig, Surface, UsageError};
use crate::RunError;

/// Result of one experiment before it is written out.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub result: Value,
    pub records: Vec<Record>,
}

pub const PLANE_RESIDUAL_TOLERANCE: f64 = 1e-6;
pub const PLANE_FUNCTIONAL_TOLERANCE: f64 = 1e-3;
pub const VARIATION_SEEDS: u64 = 5;
pub const VARIATION_SUPPORT: f64 = 6.0;
pub const SCALING_TIMES: [f64; 3] = [-4.0, -1.0, -0.25];
pub const FLOW_FRACTION: f64 = 0.5;

pub fn load_mesh(surface: &Surface, resolution: u32) -> Result<TriMesh, RunError> {
    Ok(match surface {
        Surface::Canonical(kind) => make_canonical(*kind, resolution)?,
        Surface::Off(path) => read_off(path)?,
    })
}

fn resolution_or(cfg: &RunConfig, default: u32) -> u32 {
    cfg.resolution.unwrap_or(default)
}

fn mesh_resolution(cfg: &RunConfig, res: u32) -> Option<u32> {
    cfg.surface.canonical().map(|_| res)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- residual

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub resolution: u32,
    pub vertices: usize,
    pub mean_edge: f64,
    pub norm_inf: f64,
    pub norm_l2_weighted: f64,
}

/// Residual norms over the given levels.
pub fn residual_table(kind: CanonicalKind, levels: &[u32]) -> Result<Vec<ResidualRow>, RunError> {
    levels
        .iter()
        .map(|&res| {
            let mesh = make_canonical(kind, res)?;
            let r = residual(&mesh, &compute_geometry(&mesh)?)?;
            Ok(ResidualRow {
                resolution: res,
                vertices: mesh.vertex_count(),
                mean_edge: mesh.mean_edge_length(),
                norm_inf: r.norm_inf,
                norm_l2_weighted: r.norm_l2_weighted,
            })
        })
        .collect()
}

/// Largest increase between consecutive levels (≤ 0 when non-increasing).
pub fn largest_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn residual_tolerance(kind: Option<CanonicalKind>) -> f64 {
    match kind {
        Some(CanonicalKind::Plane) => PLANE_RESIDUAL_TOLERANCE,
        _ => 5e-3,
    }
}

pub fn residual_records(kind: CanonicalKind, rows: &[ResidualRow], tol: f64) -> Vec<Record> {
    let last = rows.last().expect("at least one level");
    let mut records = vec![Record::below(
        "residual.norm_inf",
        last.norm_inf,
        tol,
        kind.name(),
        Some(last.resolution),
    )];
    if rows.len() > 1 {
        let values: Vec<f64> = rows.iter().map(|r| r.norm_inf).collect();
        records.push(Record::at_most(
            "residual.largest_increase",
            largest_increase(&values),
            0.0,
            kind.name(),
            Some(last.resolution),
        ));
    }
    records
}

pub fn run_residual(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let res = resolution_or(cfg, 4);
    let tol = cfg.tolerance_or("residual", residual_tolerance(cfg.surface.canonical()));
    let mesh = load_mesh(&cfg.surface, res)?;
    let geom = compute_geometry(&mesh)?;
    let r = residual(&mesh, &geom)?;
    write_field_csv(out.join("residual.csv"), &mesh, &r.pointwise.interior().0)?;

    let (table, records) = match cfg.surface.canonical() {
        Some(kind) => {
            let levels: Vec<u32> = (res.saturating_sub(2).max(1)..=res).collect();
            let rows = residual_table(kind, &levels)?;
            write_rows(&out.join("residual_convergence.csv"), &rows)?;
            let records = residual_records(kind, &rows, tol);
            (rows, records)
        }
        None => (
            Vec::new(),
            vec![Record::below(
                "residual.norm_inf",
                r.norm_inf,
                tol,
                cfg.surface.id(),
                None,
            )],
        ),
    };
    Ok(CommandOutput {
        result: json!({
            "norm_inf": r.norm_inf,
            "norm_l2_weighted": r.norm_l2_weighted,
            "vertices": mesh.vertex_count(),
            "convergence": table,
        }),
        records,
    })
}

// -------------------------------------------------------------- functional

pub fn functional_tolerance(kind: CanonicalKind) -> f64 {
    match kind {
        CanonicalKind::Plane => PLANE_FUNCTIONAL_TOLERANCE,
        _ => 1e-2,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalRow {
    pub resolution: u32,
    pub value: f64,
    pub expected: f64,
    pub relative_error: f64,
}

pub fn run_functional(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let res = resolution_or(cfg, 4);
    let mesh = load_mesh(&cfg.surface, res)?;
    let value = f_value(&mesh, &compute_geometry(&mesh)?);
    let Some(kind) = cfg.surface.canonical() else {
        return Ok(CommandOutput {
            result: json!({ "value": value }),
            records: Vec::new(),
        });
    };
    let expected = canonical_f(kind);
    let mut rows = Vec::new();
    for level in res.saturating_sub(2).max(1)..=res {
        let m = make_canonical(kind, level)?;
        let v = f_value(&m, &compute_geometry(&m)?);
        rows.push(FunctionalRow {
            resolution: level,
            value: v,
            expected,
            relative_error: (v - expected).abs() / expected,
        });
    }
    write_rows(&out.join("functional.csv"), &rows)?;
    let relative_error = (value - expected).abs() / expected;
    let tol = cfg.tolerance_or("functional", functional_tolerance(kind));
    Ok(CommandOutput {
        result: json!({
            "value": value,
            "expected": expected,
            "truncation_tail": truncation_tail(kind),
            "relative_error": relative_error,
            "levels": rows,
        }),
        records: vec![Record::at_most(
            "functional.relative_error",
            relative_error,
            tol,
            kind.name(),
            Some(res),
        )],
    })
}

// --------------------------------------------------------- variation-check

#[derive(Debug, Clone, Serialize)]
pub struct VariationRow {
    pub seed: u64,
    pub step: f64,
    pub fd: f64,
    pub analytic: f64,
    pub relative_gap: f64,
    pub field_max: f64,
    pub analytic_over_field_max: f64,
}

pub fn variation_rows(
    mesh: &TriMesh,
    seeds: impl Iterator<Item = u64>,
) -> Result<Vec<VariationRow>, RunError> {
    let geom = compute_geometry(mesh)?;
    seeds
        .map(|seed| {
            let field = smooth_random_field(mesh, seed, VARIATION_SUPPORT);
            let field_max = field.max_abs();
            let var = VariationField::new(mesh, field)?;
            let check = fd_variation_check(mesh, &var, None)?;
            let analytic = first_variation(mesh, &geom, &var)?;
            Ok(VariationRow {
                seed,
                step: check.step,
                fd: check.fd,
                analytic: check.analytic,
                relative_gap: check.relative_gap(),
                field_max,
                analytic_over_field_max: analytic.abs() / field_max,
            })
        })
        .collect()
}

pub fn variation_records(
    rows: &[VariationRow],
    mesh_id: &str,
    resolution: Option<u32>,
    gap_tol: f64,
    analytic_tol: Option<f64>,
) -> Vec<Record> {
    let mut records = Vec::new();
    for r in rows {
        records.push(Record::at_most(
            format!("variation.relative_gap[seed={}]", r.seed),
            r.relative_gap,
            gap_tol,
            mesh_id,
            resolution,
        ));
        if let Some(t) = analytic_tol {
            records.push(Record::below(
                format!("variation.analytic_over_field_max[seed={}]", r.seed),
                r.analytic_over_field_max,
                t,
                mesh_id,
                resolution,
            ));
        }
    }
    records
}

pub fn run_variation(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let res = resolution_or(cfg, 4);
    let mesh = load_mesh(&cfg.surface, res)?;
    let base = cfg.seed.unwrap_or(0);
    let rows = variation_rows(&mesh, base..base + VARIATION_SEEDS)?;
    write_rows(&out.join("variation.csv"), &rows)?;
    // the analytic value vanishes only on shrinkers
    let analytic_tol = cfg
        .surface
        .canonical()
        .map(|_| cfg.tolerance("variation.analytic"));
    let records = variation_records(
        &rows,
        &cfg.surface.id(),
        mesh_resolution(cfg, res),
        cfg.tolerance("variation"),
        analytic_tol,
    );
    Ok(CommandOutput {
        result: json!({ "support_radius": VARIATION_SUPPORT, "fields": rows }),
        records,
    })
}

// --------------------------------------------------------------- conformal

/// Root of the scalar curvature in (0, ∞) by bisection on its sign.
pub fn bisect_sign_change(n: u32) -> f64 {
    let f = |rho: f64| conformal_scalar_curvature(n, rho);
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Serialize)]
struct CurvatureRow {
    rho: f64,
    scalar_curvature: f64,
}

pub fn conformal_records(
    n: u32,
    cfg_tol: impl Fn(&str) -> f64,
) -> Result<(Value, Vec<Record>), RunError> {
    let report = conformal_report(n)?;
    let id = format!("conformal-n{n}");
    let origin = report.scalar_curvature_at(0.0);
    let root = bisect_sign_change(n);
    let nf = n as f64;
    let distance_exact = (nf * std::f64::consts::PI).sqrt();
    let records = vec![
        Record::at_most(
            "conformal.origin_error",
            (origin - (nf + 1.0)).abs(),
            cfg_tol("conformal.origin"),
            &id,
            None,
        ),
        Record::at_most(
            "conformal.sign_change_error",
            (report.sign_change_radius - root).abs(),
            cfg_tol("conformal.sign_change"),
            &id,
            None,
        ),
        Record::at_most(
            "conformal.distance_error",
            (report.distance_to_infinity - distance_exact).abs(),
            cfg_tol("conformal.distance"),
            &id,
            None,
        ),
    ];
    let result = json!({
        "n": n,
        "scalar_curvature_at_origin": origin,
        "sign_change_radius": report.sign_change_radius,
        "sign_change_bisection": root,
        "distance_to_infinity": report.distance_to_infinity,
        "distance_closed_form": distance_exact,
    });
    Ok((result, records))
}

pub fn run_conformal(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let n = cfg.dimension.unwrap_or(2);
    if n < 2 {
        return Err(UsageError(format!("dimension must be at least 2, got {n}")).into());
    }
    let (result, records) = conformal_records(n, |name| cfg.tolerance(name))?;
    let end = 2.0 * bisect_sign_change(n);
    let rows: Vec<CurvatureRow> = (0..=200)
        .map(|i| {
            let rho = end * i as f64 / 200.0;
            CurvatureRow {
                rho,
                scalar_curvature: conformal_scalar_curvature(n, rho),
            }
        })
        .collect();
    write_rows(&out.join("conformal.csv"), &rows)?;
    Ok(CommandOutput { result, records })
}

// ---------------------------------------------------------------- spectrum

pub const SPECTRUM_MODES: [u32; 2] = [0, 1];
pub const SPECTRUM_COUNT: usize = 4;
pub const SPECTRUM_TRUNCATION: f64 = 12.0;

/// Profile of a canonical shrinker; open profiles extend to `reach`.
pub fn canonical_profile(
    kind: CanonicalKind,
    resolution: u32,
    reach: f64,
) -> Result<ProfileCurve, RunError> {
    let per_unit = 5.0 * 2f64.powi(resolution as i32 - 2);
    Ok(match kind {
        CanonicalKind::Sphere => ProfileCurve::sphere(2.0, 15 * (1usize << resolution) + 1)?,
        CanonicalKind::Cylinder => ProfileCurve::cylinder(
            2f64.sqrt(),
            reach,
            (2.0 * reach * per_unit).round() as usize + 1,
        )?,
        CanonicalKind::Plane => {
            let n = (reach * per_unit).round() as usize;
            let samples = (0..=n)
                .map(|i| [reach * i as f64 / n as f64, 0.0])
                .collect();
            ProfileCurve::new(samples, false)?
        }
    })
}

/// Lowest eigenvalues for modes {0, 1} (k = 1 counted twice).
pub fn expected_head(kind: CanonicalKind) -> [f64; 4] {
    match kind {
        CanonicalKind::Sphere | CanonicalKind::Cylinder => [-1.0, -0.5, -0.5, -0.5],
        CanonicalKind::Plane => [-0.5, 0.0, 0.0, 0.5],
    }
}

pub fn run_spectrum(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let Some(kind) = cfg.surface.canonical() else {
        return Err(UsageError("spectrum needs a canonical surface".into()).into());
    };
    let res = resolution_or(cfg, 4);
    let modes = cfg.modes.clone().unwrap_or(SPECTRUM_MODES.to_vec());
    let count = cfg.count.unwrap_or(SPECTRUM_COUNT);
    let z = cfg.truncation.unwrap_or(SPECTRUM_TRUNCATION);
    if modes.is_empty() || count == 0 {
        return Err(UsageError("spectrum needs at least one mode and count ≥ 1".into()).into());
    }
    let profile = canonical_profile(kind, res, 2.0 * z)?;
    let id = kind.name();
    let mut records = Vec::new();
    let mut per_mode = Vec::new();
    for &k in &modes {
        let s = spectrum(&profile, k, count, z)?;
        s.write_csv(out.join(format!("spectrum_k{k}.csv")))?;
        records.push(Record::at_most(
            format!("spectrum.orthonormality[k={k}]"),
            s.orthonormality_residual,
            cfg.tolerance("spectrum.orthonormality"),
            id,
            Some(res),
        ));
        per_mode.push(s);
    }
    let combined = spectrum_modes(&profile, &modes, count, z)?;
    if modes == SPECTRUM_MODES && count == SPECTRUM_COUNT {
        for (i, (got, want)) in combined.iter().zip(expected_head(kind)).enumerate() {
            records.push(Record::at_most(
                format!("spectrum.head_error[{i}]"),
                (got.value - want).abs(),
                cfg.tolerance("spectrum.head"),
                id,
                Some(res),
            ));
        }
    }
    let mut doubled = None;
    if kind == CanonicalKind::Cylinder {
        let wide = spectrum(&profile, 0, 2, 2.0 * z)?;
        let narrow = per_mode
            .iter()
            .find(|s| s.mode == 0)
            .map(|s| s.eigenvalues.clone())
            .unwrap_or(spectrum(&profile, 0, 2, z)?.eigenvalues);
        let change = narrow
            .iter()
            .zip(&wide.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        records.push(Record::below(
            "spectrum.truncation_change",
            change,
            cfg.tolerance("spectrum.truncation"),
            id,
            Some(res),
        ));
        doubled = Some(wide.eigenvalues);
    }
    Ok(CommandOutput {
        result: json!({
            "modes": per_mode,
            "combined": combined,
            "truncation": z,
            "doubled_truncation_mode0": doubled,
        }),
        records,
    })
}

// ----------------------------------------------------------------- certify

pub fn known_threshold(kind: CanonicalKind) -> f64 {
    match kind {
        CanonicalKind::Plane => 2.0 * 3f64.ln().sqrt(),
        CanonicalKind::Sphere => 2.0,
        // a = √(R² − 2) solves erfc(a/2) = ¼ erf(a/2)
        CanonicalKind::Cylinder => 1.967_691_279_931_213_2,
    }
}

pub fn analytic_model(kind: CanonicalKind) -> CertificateModel<'static> {
    match kind {
        CanonicalKind::Plane => CertificateModel::Plane,
        CanonicalKind::Sphere => CertificateModel::Sphere,
        CanonicalKind::Cylinder => CertificateModel::Cylinder,
    }
}

pub const THRESHOLD_BRACKET: (f64, f64) = (1.0, 4.0);
pub const THRESHOLD_TOL: f64 = 1e-10;

pub fn certificate_records(
    report: &CertificateReport,
    id: &str,
    res: Option<u32>,
    gap_tol: f64,
) -> Vec<Record> {
    vec![
        Record::below("certify.bound", report.bound, 0.0, id, res),
        Record::below("certify.form_value", report.form_value, 0.0, id, res),
        Record::at_most(
            "certify.form_minus_bound",
            report.form_value - report.bound,
            gap_tol,
            id,
            res,
        ),
    ]
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    #[serde(rename = "R")]
    radius: f64,
    tail_term: f64,
    core_term: f64,
    bound: f64,
    form_value: f64,
}

pub fn run_certify(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let radius = cfg.radius.unwrap_or(3.0);
    if radius.is_nan() || radius <= 0.0 {
        return Err(UsageError(format!("radius must be positive, got {radius}")).into());
    }
    let use_mesh = cfg.resolution.is_some() || matches!(cfg.surface, Surface::Off(_));
    let mesh = if use_mesh {
        Some(load_mesh(&cfg.surface, resolution_or(cfg, 4))?)
    } else {
        None
    };
    let geom = mesh.as_ref().map(compute_geometry).transpose()?;
    let model = match (&mesh, &geom, cfg.surface.canonical()) {
        (Some(mesh), Some(geom), _) => CertificateModel::Mesh {
            mesh,
            geom,
            base: cfg.base_point.map(|p| Vec3::new(p[0], p[1], p[2])),
        },
        (_, _, Some(kind)) => analytic_model(kind),
        _ => unreachable!("OFF surfaces always load a mesh"),
    };
    let res = if use_mesh {
        mesh_resolution(cfg, resolution_or(cfg, 4))
    } else {
        None
    };
    let id = format!("{}:{}", cfg.surface.id(), model.name());
    let report = instability_certificate(model, radius)?;
    let mut records = certificate_records(&report, &id, res, cfg.tolerance("certify.form_gap"));

    let mut threshold = None;
    if let Some(kind) = cfg.surface.canonical() {
        let t = certificate_threshold(
            model,
            THRESHOLD_BRACKET.0,
            THRESHOLD_BRACKET.1,
            THRESHOLD_TOL,
        )?;
        let known = known_threshold(kind);
        records.push(Record::at_most(
            "certify.threshold_relative_error",
            (t - known).abs() / known,
            cfg.tolerance("certify.threshold"),
            &id,
            res,
        ));
        threshold = Some(json!({ "bisection": t, "known": known }));
    }

    let mut rows = Vec::new();
    for i in 2..=24 {
        let r = 0.25 * i as f64;
        let c = instability_certificate(model, r)?;
        rows.push(SweepRow {
            radius: r,
            tail_term: c.tail_term,
            core_term: c.core_term,
            bound: c.bound,
            form_value: c.form_value,
        });
    }
    write_rows(&out.join("certify_sweep.csv"), &rows)?;
    Ok(CommandOutput {
        result: json!({ "model": model.name(), "certificate": report, "threshold": threshold }),
        records,
    })
}

// -------------------------------------------------------------------- flow

/// Fixed step count keeping dt inside the explicit bound all the way to
/// `t1`; edge lengths of √(−t)Σ scale with √(−t).
pub fn trajectory_steps(mesh: &TriMesh, t0: f64, t1: f64) -> usize {
    let dt =
        FLOW_FRACTION * FlowState::new(mesh.clone(), t0).stable_step(DEFAULT_STABILITY) * (-t1);
    ((t1 - t0) / dt).ceil() as usize
}

/// Spread max − min of the self-similar residual over `times`.
pub fn scaling_spread(mesh: &TriMesh, times: &[f64]) -> Result<(Vec<f64>, f64), RunError> {
    let values = times
        .iter()
        .map(|&t| selfsimilar_residual(mesh, t))
        .collect::<Result<Vec<_>, _>>()?;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((values, hi - lo))
}

pub fn run_flow(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let res = resolution_or(cfg, 3);
    let t_end = cfg.t_end.unwrap_or(-0.25);
    if !(-1.0 < t_end && t_end < 0.0) {
        return Err(UsageError(format!("t_end must lie in (-1, 0), got {t_end}")).into());
    }
    let mesh = load_mesh(&cfg.surface, res)?;
    let id = cfg.surface.id();
    let level = mesh_resolution(cfg, res);
    let mut records = Vec::new();

    let start = FlowState::new(mesh.clone(), -1.0);
    let every = (trajectory_steps(&mesh, -1.0, t_end) / 8).max(1);
    let (end, snapshots) = write_trajectory(&start, t_end, FLOW_FRACTION, every, out.join("flow"))?;

    let mut radius = None;
    if cfg.surface.canonical() == Some(CanonicalKind::Sphere) {
        let expected = 2.0 * (-t_end).sqrt();
        let got = end.mean_radius();
        records.push(Record::at_most(
            "flow.mean_radius_relative_error",
            (got - expected).abs() / expected,
            cfg.tolerance("flow.radius"),
            &id,
            level,
        ));
        radius = Some(json!({ "mean_radius": got, "expected": expected }));
    }

    let (values, spread) = scaling_spread(&mesh, &SCALING_TIMES)?;
    records.push(Record::at_most(
        "flow.scaling_spread",
        spread,
        cfg.tolerance("flow.scaling"),
        &id,
        level,
    ));

    let steps = trajectory_steps(&mesh, -1.0, t_end);
    let distance = rescaled_trajectory_check(&mesh, -1.0, t_end, steps)?;
    records.push(Record::at_most(
        "flow.trajectory_hausdorff",
        distance,
        cfg.tolerance("flow.hausdorff"),
        &id,
        level,
    ));

    Ok(CommandOutput {
        result: json!({
            "t_end": t_end,
            "steps": end.step_count,
            "radius": radius,
            "selfsimilar_residuals": SCALING_TIMES.iter().zip(&values).map(|(t, v)| json!({"t": t, "residual": v})).collect::<Vec<_>>(),
            "trajectory_hausdorff": distance,
            "snapshots": snapshots,
        }),
        records,
    })
}

/// Mean vertex radius after flowing the radius-2 sphere from −1 to `t_end`.
pub fn sphere_flow_radius(resolution: u32, t_end: f64) -> Result<f64, RunError> {
    let mesh = make_canonical(CanonicalKind::Sphere, resolution)?;
    Ok(flow_until(&FlowState::new(mesh, -1.0), t_end, FLOW_FRACTION)?.mean_radius())
}

// ------------------------------------------------------------- shoot-torus

pub const SHOOT_RANGE: (f64, f64) = (0.3, 1.2);
pub const PROFILE_MIN_SPACING: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct TorusSummary {
    pub r_start: f64,
    pub r_start_half_step: f64,
    pub step_halving_difference: f64,
    pub r_opposite: f64,
    pub max_height: f64,
    pub closure_defect: f64,
    pub angular_resolution: usize,
    pub vertices: usize,
    pub genus: u32,
    pub residual_norm_inf: f64,
}

pub fn shoot_torus(
    resolution: u32,
    tol: f64,
) -> Result<(TorusSummary, ProfileCurve, TriMesh), RunError> {
    let options = ShootingOptions::default();
    let closed = shoot_closed_profile(SHOOT_RANGE, tol, &options)?;
    let halved = ShootingOptions {
        step: options.step / 2.0,
        ..options
    };
    let finer = shoot_closed_profile(SHOOT_RANGE, tol, &halved)?;
    let m = 16 * (1usize << resolution);
    let mesh = revolve(
        &closed
            .profile
            .resampled_for_revolution(m, PROFILE_MIN_SPACING)?,
        m,
    )?;
    let residual = residual(&mesh, &compute_geometry(&mesh)?)?;
    let summary = TorusSummary {
        r_start: closed.r_start,
        r_start_half_step: finer.r_start,
        step_halving_difference: (closed.r_start - finer.r_start).abs(),
        r_opposite: closed.r_opposite,
        max_height: closed.max_height,
        closure_defect: closed.closure_defect,
        angular_resolution: m,
        vertices: mesh.vertex_count(),
        genus: genus(&mesh)?,
        residual_norm_inf: residual.norm_inf,
    };
    Ok((summary, closed.profile, mesh))
}

pub fn torus_records(s: &TorusSummary, tol: f64, residual_tol: f64, res: u32) -> Vec<Record> {
    let id = "angenent-torus";
    vec![
        Record::at_most(
            "shoot.genus_minus_one",
            (s.genus as f64 - 1.0).abs(),
            0.0,
            id,
            Some(res),
        ),
        Record::below(
            "shoot.residual_norm_inf",
            s.residual_norm_inf,
            residual_tol,
            id,
            Some(res),
        ),
        Record::below(
            "shoot.step_halving_difference",
            s.step_halving_difference,
            2.0 * tol,
            id,
            Some(res),
        ),
    ]
}

pub fn run_shoot_torus(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, RunError> {
    let res = resolution_or(cfg, 4);
    let tol = cfg.tolerance("shoot.tol");
    let (summary, profile, mesh) = shoot_torus(res, tol)?;
    profile.write_csv(out.join("torus_profile.csv"))?;
    write_off(out.join("torus.off"), &mesh)?;
    let records = torus_records(&summary, tol, cfg.tolerance("shoot.residual"), res);
    Ok(CommandOutput {
        result: serde_json::to_value(&summary)?,
        records,
    })
}
