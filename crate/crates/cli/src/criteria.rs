//! The consolidated acceptance report behind `report-all`.

use serde::Serialize;
use shrinklab_core::functional::canonical_f;
use shrinklab_core::report::Record;
use shrinklab_core::shrinker::canonical::{make_canonical, CanonicalKind};
use shrinklab_core::stability::{
    certificate_threshold, instability_certificate, quadratic_form, spectrum, spectrum_modes,
    translation_eigen_check,
};
use shrinklab_core::surface::compute_geometry;
use shrinklab_core::surface::field::smooth_random_field;
use shrinklab_core::surface::Vec3;

use crate::commands::{
    analytic_model, canonical_profile, certificate_records, conformal_records, expected_head,
    functional_tolerance, known_threshold, residual_records, residual_table, residual_tolerance,
    scaling_spread, shoot_torus, sphere_flow_radius, torus_records, variation_records,
    variation_rows, SCALING_TIMES, SPECTRUM_COUNT, SPECTRUM_MODES, SPECTRUM_TRUNCATION,
    THRESHOLD_BRACKET, THRESHOLD_TOL, VARIATION_SEEDS,
};
use crate::config::RunConfig;
use crate::RunError;

pub const RESIDUAL_LEVELS: [u32; 3] = [2, 3, 4];
pub const FUNCTIONAL_LEVEL: u32 = 4;
pub const VARIATION_LEVEL: u32 = 4;
pub const EIGEN_LEVELS: [u32; 3] = [2, 3, 4];
pub const EIGEN_TOLERANCE: f64 = 1e-2;
pub const EIGEN_MIN_RATIO: f64 = 3.0;
pub const SPECTRUM_LEVEL: u32 = 4;
pub const CERTIFY_RADIUS: f64 = 3.0;
pub const FLOW_LEVEL: u32 = 3;
pub const TORUS_LEVEL: u32 = 4;
pub const FORM_LEVEL: u32 = 5;
pub const FORM_FIELDS: u64 = 10;
pub const FORM_TOLERANCE: f64 = 1e-3;
pub const FORM_SUPPORT: f64 = 6.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub records: Vec<Record>,
}

impl CriterionReport {
    fn new(id: u32, title: &'static str, records: Vec<Record>) -> Self {
        CriterionReport {
            id,
            title,
            passed: !records.is_empty() && records.iter().all(|r| r.passed),
            records,
        }
    }

    /// `criterion N: PASS|FAIL  title`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2}: {}  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title
        )
    }
}

fn residual_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    for kind in CanonicalKind::ALL {
        let rows = residual_table(kind, &RESIDUAL_LEVELS)?;
        let tol = cfg.tolerance_or("residual", residual_tolerance(Some(kind)));
        records.extend(residual_records(kind, &rows, tol));
    }
    Ok(records)
}

fn functional_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    for kind in CanonicalKind::ALL {
        let mesh = make_canonical(kind, FUNCTIONAL_LEVEL)?;
        let value = shrinklab_core::functional::f_value(&mesh, &compute_geometry(&mesh)?);
        let expected = canonical_f(kind);
        records.push(Record::at_most(
            "functional.relative_error",
            (value - expected).abs() / expected,
            cfg.tolerance_or("functional", functional_tolerance(kind)),
            kind.name(),
            Some(FUNCTIONAL_LEVEL),
        ));
    }
    Ok(records)
}

fn variation_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    for kind in CanonicalKind::ALL {
        let mesh = make_canonical(kind, VARIATION_LEVEL)?;
        let rows = variation_rows(&mesh, 0..VARIATION_SEEDS)?;
        records.extend(variation_records(
            &rows,
            kind.name(),
            Some(VARIATION_LEVEL),
            cfg.tolerance("variation"),
            Some(cfg.tolerance("variation.analytic")),
        ));
    }
    Ok(records)
}

/// Direction whose normal component is a nontrivial eigenfunction.
pub fn eigen_direction(kind: CanonicalKind) -> Vec3 {
    match kind {
        CanonicalKind::Cylinder => Vec3::x(),
        _ => Vec3::z(),
    }
}

fn eigen_criterion() -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    for kind in [CanonicalKind::Sphere, CanonicalKind::Cylinder] {
        let v = eigen_direction(kind);
        let mut defects = Vec::new();
        for &res in &EIGEN_LEVELS {
            let mesh = make_canonical(kind, res)?;
            defects.push(translation_eigen_check(
                &mesh,
                &compute_geometry(&mesh)?,
                &v,
            )?);
        }
        let finest = *EIGEN_LEVELS.last().unwrap();
        records.push(Record::below(
            "eigen.defect",
            *defects.last().unwrap(),
            EIGEN_TOLERANCE,
            kind.name(),
            Some(finest),
        ));
        for (w, res) in defects.windows(2).zip(&EIGEN_LEVELS[1..]) {
            // ratio ≥ 3 expressed as 1/ratio ≤ 1/3
            records.push(Record::at_most(
                "eigen.inverse_halving_ratio",
                w[1] / w[0],
                1.0 / EIGEN_MIN_RATIO,
                kind.name(),
                Some(*res),
            ));
        }
    }
    Ok(records)
}

fn spectrum_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    let head_tol = cfg.tolerance("spectrum.head");
    let z = SPECTRUM_TRUNCATION;

    let sphere = canonical_profile(CanonicalKind::Sphere, SPECTRUM_LEVEL, 2.0 * z)?;
    let combined = spectrum_modes(&sphere, &SPECTRUM_MODES, SPECTRUM_COUNT, z)?;
    for (i, (got, want)) in combined
        .iter()
        .zip(expected_head(CanonicalKind::Sphere))
        .enumerate()
    {
        records.push(Record::at_most(
            format!("spectrum.head_error[{i}]"),
            (got.value - want).abs(),
            head_tol,
            "sphere",
            Some(SPECTRUM_LEVEL),
        ));
    }

    let cylinder = canonical_profile(CanonicalKind::Cylinder, SPECTRUM_LEVEL, 2.0 * z)?;
    let narrow = spectrum(&cylinder, 0, 2, z)?;
    let wide = spectrum(&cylinder, 0, 2, 2.0 * z)?;
    for (i, (got, want)) in narrow.eigenvalues.iter().zip([-1.0, -0.5]).enumerate() {
        records.push(Record::at_most(
            format!("spectrum.cylinder_k0_head_error[{i}]"),
            (got - want).abs(),
            head_tol,
            "cylinder",
            Some(SPECTRUM_LEVEL),
        ));
    }
    let change = narrow
        .eigenvalues
        .iter()
        .zip(&wide.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    records.push(Record::below(
        "spectrum.truncation_change",
        change,
        cfg.tolerance("spectrum.truncation"),
        "cylinder",
        Some(SPECTRUM_LEVEL),
    ));
    Ok(records)
}

fn certificate_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    let t = certificate_threshold(
        analytic_model(CanonicalKind::Plane),
        THRESHOLD_BRACKET.0,
        THRESHOLD_BRACKET.1,
        THRESHOLD_TOL,
    )?;
    let known = known_threshold(CanonicalKind::Plane);
    records.push(Record::at_most(
        "certify.threshold_relative_error",
        (t - known).abs() / known,
        cfg.tolerance("certify.threshold"),
        "plane",
        None,
    ));
    for kind in CanonicalKind::ALL {
        let report = instability_certificate(analytic_model(kind), CERTIFY_RADIUS)?;
        records.extend(certificate_records(
            &report,
            kind.name(),
            None,
            cfg.tolerance("certify.form_gap"),
        ));
    }
    Ok(records)
}

fn flow_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let radius = sphere_flow_radius(FLOW_LEVEL, -0.25)?;
    let mut records = vec![Record::at_most(
        "flow.mean_radius_relative_error",
        (radius - 1.0).abs(),
        cfg.tolerance("flow.radius"),
        "sphere",
        Some(FLOW_LEVEL),
    )];
    for kind in CanonicalKind::ALL {
        let mesh = make_canonical(kind, FLOW_LEVEL)?;
        let (_, spread) = scaling_spread(&mesh, &SCALING_TIMES)?;
        records.push(Record::at_most(
            "flow.scaling_spread",
            spread,
            cfg.tolerance("flow.scaling"),
            kind.name(),
            Some(FLOW_LEVEL),
        ));
    }
    Ok(records)
}

fn torus_criterion(cfg: &RunConfig) -> Result<Vec<Record>, RunError> {
    let tol = cfg.tolerance("shoot.tol");
    let (summary, _, _) = shoot_torus(TORUS_LEVEL, tol)?;
    Ok(torus_records(
        &summary,
        tol,
        cfg.tolerance("shoot.residual"),
        TORUS_LEVEL,
    ))
}

fn form_criterion() -> Result<Vec<Record>, RunError> {
    let mut records = Vec::new();
    for kind in CanonicalKind::ALL {
        let mesh = make_canonical(kind, FORM_LEVEL)?;
        let geom = compute_geometry(&mesh)?;
        for seed in 0..FORM_FIELDS {
            let u = smooth_random_field(&mesh, seed, FORM_SUPPORT);
            let report = quadratic_form(&mesh, &geom, &u)?;
            records.push(Record::at_most(
                format!("form.relative_difference[seed={seed}]"),
                report.relative_difference(),
                FORM_TOLERANCE,
                kind.name(),
                Some(FORM_LEVEL),
            ));
        }
    }
    Ok(records)
}

/// Criteria 1 to 10.
pub fn computed_criteria(cfg: &RunConfig) -> Result<Vec<CriterionReport>, RunError> {
    Ok(vec![
        CriterionReport::new(1, "shrinker residual convergence", residual_criterion(cfg)?),
        CriterionReport::new(
            2,
            "F values of the canonical shrinkers",
            functional_criterion(cfg)?,
        ),
        CriterionReport::new(3, "first-variation identity", variation_criterion(cfg)?),
        CriterionReport::new(4, "translation eigenfunction identity", eigen_criterion()?),
        CriterionReport::new(5, "spectrum heads", spectrum_criterion(cfg)?),
        CriterionReport::new(6, "instability certificate", certificate_criterion(cfg)?),
        CriterionReport::new(7, "conformal geometry", {
            conformal_records(2, |name| cfg.tolerance(name))?.1
        }),
        CriterionReport::new(8, "self-similar flow", flow_criterion(cfg)?),
        CriterionReport::new(9, "torus shooting", torus_criterion(cfg)?),
        CriterionReport::new(10, "quadratic-form consistency", form_criterion()?),
    ])
}

/// Criteria 1 to 10 computed twice, plus criterion 11 comparing the two
/// serialisations byte for byte.
pub fn report_all(cfg: &RunConfig) -> Result<Vec<CriterionReport>, RunError> {
    let mut first = computed_criteria(cfg)?;
    let second = computed_criteria(cfg)?;
    let a = serde_json::to_string(&first)?;
    let b = serde_json::to_string(&second)?;
    let differing =
        a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    first.push(CriterionReport::new(
        11,
        "determinism",
        vec![Record::at_most(
            "determinism.differing_bytes",
            differing as f64,
            0.0,
            "report-all",
            None,
        )],
    ));
    Ok(first)
}
