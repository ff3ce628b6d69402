use proptest::prelude::*;

use shrinklab_core::functional::variation::{first_variation, VariationField};
use shrinklab_core::shrinker::canonical::{make_canonical, CanonicalKind};
use shrinklab_core::shrinker::profile::ProfileCurve;
use shrinklab_core::shrinker::residual::residual;
use shrinklab_core::shrinker::shooting::{classify_orbit, ShootingOptions, ShootingState};
use shrinklab_core::stability::spectrum::spectrum;
use shrinklab_core::surface::diagnostics::genus;
use shrinklab_core::surface::field::smooth_random_field;
use shrinklab_core::surface::geometry::{compute_geometry, gaussian_weight};
use shrinklab_core::surface::io::{format_off, parse_off};
use shrinklab_core::surface::mesh::TriMesh;
use shrinklab_core::surface::operators::{face_gradients, laplace_beltrami, vertex_gradients};
use shrinklab_core::surface::Vec3;

fn grid_torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriMesh {
    let tau = std::f64::consts::TAU;
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = tau * i as f64 / nu as f64;
        for j in 0..nv {
            let v = tau * j as f64 / nv as f64;
            let rho = major + minor * v.cos();
            verts.push(Vec3::new(rho * u.cos(), rho * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + j % nv;
    let mut tris = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(verts, tris).unwrap()
}

/// |∫⟨∇φ,∇ψ⟩ρ + ∫φ(Δψ − ½⟨x,∇ψ⟩)ρ| relative to ‖∇φ‖‖∇ψ‖ in the weighted L².
fn ibp_defect(mesh: &TriMesh, seed: u64) -> f64 {
    let g = compute_geometry(mesh).unwrap();
    let phi = smooth_random_field(mesh, seed, 6.0);
    let psi = smooth_random_field(mesh, seed + 100, 6.0);
    let gp = face_gradients(mesh, phi.values());
    let gq = face_gradients(mesh, psi.values());
    let (mut dirichlet, mut dpp, mut dqq) = (0.0, 0.0, 0.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = tri.map(|v| mesh.vertices()[v]);
        let rho: f64 = (0..3)
            .map(|k| gaussian_weight(&((p[k] + p[(k + 1) % 3]) / 2.0)))
            .sum::<f64>()
            / 3.0;
        let w = mesh.triangle_area(t) * rho;
        dirichlet += w * gp[t].dot(&gq[t]);
        dpp += w * gp[t].norm_squared();
        dqq += w * gq[t].norm_squared();
    }
    let lap = laplace_beltrami(mesh, &g, &psi).unwrap();
    let grad = vertex_gradients(mesh, &g, &psi).unwrap();
    let drift: f64 = mesh
        .interior_vertices()
        .map(|v| {
            let x = mesh.vertices()[v];
            let l = lap.raw()[v] - 0.5 * x.dot(&grad[v]);
            phi[v] * l * g.gaussian_weight[v] * g.vertex_area[v]
        })
        .sum();
    (dirichlet + drift).abs() / (dpp * dqq).sqrt()
}

fn variation_over_size(mesh: &TriMesh, seed: u64) -> f64 {
    let g = compute_geometry(mesh).unwrap();
    let f = smooth_random_field(mesh, seed, 6.0);
    let size = f.max_abs();
    let var = VariationField::new(mesh, f).unwrap();
    first_variation(mesh, &g, &var).unwrap().abs() / size
}

fn kind() -> impl Strategy<Value = CanonicalKind> {
    prop::sample::select(CanonicalKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn removing_a_ball_never_raises_genus(
        cx in -3.0..3.0f64, cy in -3.0..3.0f64, cz in -1.0..1.0f64, radius in 0.2..1.5f64,
    ) {
        let torus = grid_torus(2.0, 0.7, 32, 16);
        prop_assert_eq!(genus(&torus).unwrap(), 1);
        let c = Vec3::new(cx, cy, cz);
        let vertices = torus.vertices();
        let cut = torus.submesh(|t| torus.triangles()[t].iter().all(|&v| (vertices[v] - c).norm() > radius));
        let cut = cut.ok().filter(|m| m.triangle_count() > 0);
        prop_assume!(cut.is_some());
        if let Ok(g) = genus(&cut.unwrap()) {
            prop_assert!(g <= 1);
        }
    }

    #[test]
    fn off_round_trip_is_exact(kind in kind(), seed in 0u64..1000, scale in 1e-6..1e-1f64) {
        let mesh = make_canonical(kind, 2).unwrap();
        let mut rng = seed;
        let moved: Vec<Vec3> = mesh
            .vertices()
            .iter()
            .map(|x| {
                let mut jitter = || {
                    rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * scale
                };
                x + Vec3::new(jitter(), jitter(), jitter())
            })
            .collect();
        let mesh = mesh.with_positions(moved).unwrap();
        let back = parse_off(&format_off(&mesh)).unwrap();
        prop_assert_eq!(back.vertices(), mesh.vertices());
        prop_assert_eq!(back.triangles(), mesh.triangles());
    }

    #[test]
    fn integration_by_parts_converges(kind in kind(), seed in 0u64..10_000) {
        let d: Vec<f64> = (2..=4).map(|res| ibp_defect(&make_canonical(kind, res).unwrap(), seed)).collect();
        prop_assert!(d[0] / d[2] >= 4.0 && d[2] < 1e-2, "{} {:?}", kind, d);
    }

    #[test]
    fn first_variation_vanishes_at_second_order(seed in 0u64..10_000) {
        let plane = make_canonical(CanonicalKind::Plane, 3).unwrap();
        prop_assert!(variation_over_size(&plane, seed) < 1e-14);
        for kind in [CanonicalKind::Sphere, CanonicalKind::Cylinder] {
            let v: Vec<f64> = (2..=4).map(|res| variation_over_size(&make_canonical(kind, res).unwrap(), seed)).collect();
            prop_assert!(v[2] < 1e-4, "{} {:?}", kind, v);
            prop_assert!(v[0] / v[1] >= 3.0 && v[1] / v[2] >= 3.0, "{} {:?}", kind, v);
        }
    }

    #[test]
    fn orbits_are_always_classified(r in 0.3..5.0f64, z in -2.0..2.0f64, theta in -3.2..3.2f64) {
        let options = ShootingOptions { max_arclength: 40.0, ..ShootingOptions::default() };
        let start = ShootingState { r, z, theta, s: 0.0 };
        let orbit = classify_orbit(start, &options, 1e-6).unwrap();
        let last = orbit.last;
        prop_assert!(last.r.is_finite() && last.z.is_finite() && last.theta.is_finite());
        prop_assert!(last.s >= 0.0 && last.s <= options.max_arclength + options.step);
    }

    #[test]
    fn refinement_keeps_samples_and_length(radius in 0.5..4.0f64, samples in 9usize..80) {
        let curve = ProfileCurve::sphere(radius, samples).unwrap();
        let fine = curve.refined().unwrap();
        prop_assert_eq!(fine.len(), 2 * curve.len() - 1);
        for (k, p) in curve.samples().iter().enumerate() {
            prop_assert_eq!(fine.samples()[2 * k], *p);
        }
        prop_assert!(fine.starts_on_axis() && fine.ends_on_axis());
        let exact = std::f64::consts::PI * radius;
        prop_assert!((exact - fine.length()).abs() <= (exact - curve.length()).abs() + 1e-12);
        for p in fine.samples() {
            prop_assert!((p[0].hypot(p[1]) - radius).abs() < 1e-2 * radius);
        }
    }

    #[test]
    fn spectrum_is_ascending(mode in 0u32..3, count in 2usize..5) {
        let profile = ProfileCurve::sphere(2.0, 121).unwrap();
        let s = spectrum(&profile, mode, count, 12.0).unwrap();
        prop_assert_eq!(s.eigenvalues.len(), count);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]), "{:?}", s.eigenvalues);
        prop_assert!(s.orthonormality_residual < 1e-8);
    }
}

#[test]
fn residual_drops_by_a_factor_per_level() {
    for kind in CanonicalKind::ALL {
        let norms: Vec<f64> = (2..=4)
            .map(|res| {
                let mesh = make_canonical(kind, res).unwrap();
                residual(&mesh, &compute_geometry(&mesh).unwrap())
                    .unwrap()
                    .norm_inf
            })
            .collect();
        if kind == CanonicalKind::Plane {
            assert!(norms.iter().all(|&r| r < 1e-12), "{norms:?}");
        } else {
            assert!(
                norms[0] / norms[1] >= 3.0 && norms[1] / norms[2] >= 3.0,
                "{kind} {norms:?}"
            );
        }
    }
}
