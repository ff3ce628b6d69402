//! Acceptance gate: every criterion at its stated tolerance, one line each.

use std::f64::consts::{E, PI};
use std::process::Command;
use std::time::Instant;

use shrinklab_core::flow::{flow_until, selfsimilar_residual, FlowState};
use shrinklab_core::functional::{conformal_report, f_value, fd_variation_check, VariationField};
use shrinklab_core::shrinker::canonical::{make_canonical, CanonicalKind};
use shrinklab_core::shrinker::profile::{revolve, ProfileCurve};
use shrinklab_core::shrinker::residual::residual;
use shrinklab_core::shrinker::shooting::{shoot_closed_profile, ShootingOptions};
use shrinklab_core::stability::{
    certificate_threshold, instability_certificate, quadratic_form, spectrum, spectrum_modes,
    translation_eigen_check, CertificateModel,
};
use shrinklab_core::surface::field::smooth_random_field;
use shrinklab_core::surface::{compute_geometry, TriMesh, Vec3};

type Outcome = Result<Vec<String>, String>;

fn mesh(kind: CanonicalKind, res: u32) -> TriMesh {
    make_canonical(kind, res).expect("canonical mesh")
}

fn check(notes: &mut Vec<String>, failures: &mut Vec<String>, ok: bool, text: String) {
    if ok {
        notes.push(text);
    } else {
        failures.push(text);
    }
}

fn finish(notes: Vec<String>, failures: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Ok(notes)
    } else {
        Err(failures.join("; "))
    }
}

fn residual_convergence() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    for (kind, bound) in [
        (CanonicalKind::Plane, 1e-6),
        (CanonicalKind::Sphere, 5e-3),
        (CanonicalKind::Cylinder, 5e-3),
    ] {
        let norms: Vec<f64> = (2..=4)
            .map(|res| {
                let m = mesh(kind, res);
                residual(&m, &compute_geometry(&m).unwrap())
                    .unwrap()
                    .norm_inf
            })
            .collect();
        let monotone = norms.windows(2).all(|w| w[1] <= w[0]);
        check(
            &mut notes,
            &mut failures,
            monotone,
            format!(
                "{kind} non-increasing {:?}",
                norms.iter().map(|n| format!("{n:.2e}")).collect::<Vec<_>>()
            ),
        );
        check(
            &mut notes,
            &mut failures,
            norms[2] < bound,
            format!("{kind} final {:.3e} < {bound:e}", norms[2]),
        );
    }
    finish(notes, failures)
}

fn functional_values() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    for (kind, exact, rel) in [
        (CanonicalKind::Plane, 1.0, 1e-3),
        (CanonicalKind::Sphere, 4.0 / E, 1e-2),
        (CanonicalKind::Cylinder, (2.0 * PI / E).sqrt(), 1e-2),
    ] {
        let m = mesh(kind, 4);
        let f = f_value(&m, &compute_geometry(&m).unwrap());
        let err = (f - exact).abs() / exact;
        check(
            &mut notes,
            &mut failures,
            err <= rel,
            format!("{kind} F = {f:.6} vs {exact:.6}"),
        );
    }
    finish(notes, failures)
}

fn first_variation() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    for kind in CanonicalKind::ALL {
        let m = mesh(kind, 4);
        let (mut worst_gap, mut worst_value) = (0.0f64, 0.0f64);
        for seed in 0..5 {
            let field = smooth_random_field(&m, seed, 6.0);
            let sup = field.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let c = fd_variation_check(&m, &VariationField::new(&m, field).unwrap(), None).unwrap();
            worst_gap = worst_gap.max((c.fd - c.analytic).abs() / c.analytic.abs().max(1.0));
            worst_value = worst_value.max(c.analytic.abs() / sup);
        }
        check(
            &mut notes,
            &mut failures,
            worst_gap <= 1e-3,
            format!("{kind} gap {worst_gap:.2e}"),
        );
        check(
            &mut notes,
            &mut failures,
            worst_value < 1e-3,
            format!("{kind} |δF|/‖f‖ {worst_value:.2e}"),
        );
    }
    finish(notes, failures)
}

fn eigenfunction_identity() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    // ⟨e₃, n⟩ vanishes on the cylinder; its nontrivial directions are ⟂ to the axis
    for (kind, v) in [
        (CanonicalKind::Sphere, Vec3::z()),
        (CanonicalKind::Cylinder, Vec3::x()),
    ] {
        let defects: Vec<f64> = (2..=4)
            .map(|res| {
                let m = mesh(kind, res);
                translation_eigen_check(&m, &compute_geometry(&m).unwrap(), &v).unwrap()
            })
            .collect();
        let ratios: Vec<f64> = defects.windows(2).map(|w| w[0] / w[1]).collect();
        check(
            &mut notes,
            &mut failures,
            defects[2] < 1e-2,
            format!("{kind} defect {:.2e}", defects[2]),
        );
        check(
            &mut notes,
            &mut failures,
            ratios.iter().all(|&r| r >= 3.0),
            format!("{kind} ratios {ratios:.2?}"),
        );
    }
    finish(notes, failures)
}

fn spectrum_heads() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    let sphere = ProfileCurve::sphere(2.0, 241).unwrap();
    let head: Vec<f64> = spectrum_modes(&sphere, &[0, 1], 4, 12.0)
        .unwrap()
        .iter()
        .map(|e| e.value)
        .collect();
    let ok = head
        .iter()
        .zip([-1.0, -0.5, -0.5, -0.5])
        .all(|(a, b)| (a - b).abs() <= 1e-2);
    check(&mut notes, &mut failures, ok, format!("sphere {head:.6?}"));

    let cylinder = ProfileCurve::cylinder(2f64.sqrt(), 24.0, 961).unwrap();
    let z12 = spectrum(&cylinder, 0, 2, 12.0).unwrap().eigenvalues;
    let z24 = spectrum(&cylinder, 0, 2, 24.0).unwrap().eigenvalues;
    let ok = z12
        .iter()
        .zip([-1.0, -0.5])
        .all(|(a, b)| (a - b).abs() <= 1e-2);
    check(
        &mut notes,
        &mut failures,
        ok,
        format!("cylinder k=0 {z12:.6?}"),
    );
    let change = z12
        .iter()
        .zip(&z24)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        &mut notes,
        &mut failures,
        change < 1e-6,
        format!("Z 12 → 24 change {change:.1e}"),
    );
    finish(notes, failures)
}

fn instability_certificate_check() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    let exact = 2.0 * 3f64.ln().sqrt();
    let t = certificate_threshold(CertificateModel::Plane, 1.0, 4.0, 1e-10).unwrap();
    check(
        &mut notes,
        &mut failures,
        (t - exact).abs() / exact <= 2e-2,
        format!("plane threshold {t:.6} vs {exact:.6}"),
    );
    for model in [
        CertificateModel::Plane,
        CertificateModel::Sphere,
        CertificateModel::Cylinder,
    ] {
        let r = instability_certificate(model, 3.0).unwrap();
        check(
            &mut notes,
            &mut failures,
            r.bound < 0.0 && r.form_value < 0.0,
            format!(
                "{} R=3 bound {:.3} form {:.3}",
                model.name(),
                r.bound,
                r.form_value
            ),
        );
    }
    finish(notes, failures)
}

fn conformal_geometry() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    let c = conformal_report(2).unwrap();
    let origin = c.scalar_curvature_at(0.0);
    check(
        &mut notes,
        &mut failures,
        (origin - 3.0).abs() <= 1e-12,
        format!("R(0) = {origin}"),
    );
    let root = 24f64.sqrt();
    check(
        &mut notes,
        &mut failures,
        (c.sign_change_radius - root).abs() <= 1e-9,
        format!("sign change {:.12}", c.sign_change_radius),
    );
    // the curvature itself must change sign there
    let straddles =
        c.scalar_curvature_at(root - 1e-6) > 0.0 && c.scalar_curvature_at(root + 1e-6) < 0.0;
    check(
        &mut notes,
        &mut failures,
        straddles,
        "sign flips across √24".into(),
    );
    let d = (2.0 * PI).sqrt();
    check(
        &mut notes,
        &mut failures,
        (c.distance_to_infinity - d).abs() <= 1e-6,
        format!("distance {:.10}", c.distance_to_infinity),
    );
    finish(notes, failures)
}

fn selfsimilar_flow() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    let end = flow_until(
        &FlowState::new(mesh(CanonicalKind::Sphere, 3), -1.0),
        -0.25,
        0.5,
    )
    .unwrap();
    let r = end.mean_radius();
    check(
        &mut notes,
        &mut failures,
        (r - 1.0).abs() <= 1e-2,
        format!("radius at t=-1/4 {r:.5}"),
    );
    for kind in CanonicalKind::ALL {
        let m = mesh(kind, 3);
        let values: Vec<f64> = [-4.0, -1.0, -0.25]
            .iter()
            .map(|&t| selfsimilar_residual(&m, t).unwrap())
            .collect();
        let spread = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        check(
            &mut notes,
            &mut failures,
            spread <= 1e-2,
            format!("{kind} spread {spread:.1e}"),
        );
    }
    finish(notes, failures)
}

fn torus_shooting() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    let tol = 1e-10;
    let options = ShootingOptions::default();
    let torus = shoot_closed_profile((0.3, 1.2), tol, &options).unwrap();
    let halved = ShootingOptions {
        step: options.step / 2.0,
        ..options
    };
    let finer = shoot_closed_profile((0.3, 1.2), tol, &halved).unwrap();
    let m = 256;
    let surface = revolve(&torus.profile.resampled_for_revolution(m, 1e-3).unwrap(), m).unwrap();
    // closed orientable surface: χ = V − E + F = 2 − 2g
    let chi = surface.vertex_count() as i64 - surface.edges().len() as i64
        + surface.triangle_count() as i64;
    check(
        &mut notes,
        &mut failures,
        surface.is_closed() && chi == 0,
        format!("closed, χ = {chi}"),
    );
    let res = residual(&surface, &compute_geometry(&surface).unwrap())
        .unwrap()
        .norm_inf;
    check(
        &mut notes,
        &mut failures,
        res < 1e-2,
        format!("residual {res:.2e}"),
    );
    let diff = (torus.r_start - finer.r_start).abs();
    check(
        &mut notes,
        &mut failures,
        diff < 2.0 * tol,
        format!("step halving {diff:.1e}"),
    );
    finish(notes, failures)
}

fn quadratic_form_consistency() -> Outcome {
    let (mut notes, mut failures) = (Vec::new(), Vec::new());
    for kind in CanonicalKind::ALL {
        let m = mesh(kind, 5);
        let geom = compute_geometry(&m).unwrap();
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let u = smooth_random_field(&m, seed, 6.0);
            let q = quadratic_form(&m, &geom, &u).unwrap();
            let scale = q.gradient_term + q.curvature_term + q.zeroth_term;
            worst = worst.max((q.direct - q.value).abs() / scale);
        }
        check(
            &mut notes,
            &mut failures,
            worst <= 1e-3,
            format!("{kind} worst {worst:.2e}"),
        );
    }
    finish(notes, failures)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_shrinklab"))
            .args(["report-all", "--output-dir"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if status.status.code() != Some(0) {
            return Err(format!("report-all exited with {:?}", status.status.code()));
        }
        outputs.push(std::fs::read(out.join("report-all.json")).map_err(|e| e.to_string())?);
    }
    if outputs[0] == outputs[1] {
        Ok(vec![format!("{} identical bytes", outputs[0].len())])
    } else {
        Err("report-all.json differs between runs".into())
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("shrinker residual convergence", residual_convergence),
        ("F values", functional_values),
        ("first-variation identity", first_variation),
        ("eigenfunction identity", eigenfunction_identity),
        ("spectrum heads", spectrum_heads),
        ("instability certificate", instability_certificate_check),
        ("conformal geometry", conformal_geometry),
        ("self-similar flow", selfsimilar_flow),
        ("torus shooting", torus_shooting),
        ("quadratic-form consistency", quadratic_form_consistency),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(notes) => println!(
                "criterion {:>2} PASS  {title} ({secs:.1}s): {}",
                i + 1,
                notes.join("; ")
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {title} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
