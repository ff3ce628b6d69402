//! Rotationally symmetric shrinkers.
//!
//! A surface of revolution about the z-axis with profile curve
//! (r(s), z(s)) parametrised by arclength, tangent angle θ and normal
//! N = (sin θ, −cos θ) has mean curvature
//!
//!   H = θ' + (n − 1) sin θ / r,
//!
//! the first term from the profile curve and the second from the n − 1
//! rotational directions. Substituting into H = ⟨x, N⟩/2 gives
//!
//!   r' = cos θ,  z' = sin θ,
//!   θ' = (r sin θ − z cos θ)/2 − (n − 1) sin θ / r.
//!
//! The circle r² + z² = 2n and the line r = √(2(n−1)) traversed vertically
//! (θ = π/2) are exact solutions.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::profile::ProfileCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingState {
    pub r: f64,
    pub z: f64,
    pub theta: f64,
    pub s: f64,
}

/// d/ds of (r, z, θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dr: f64,
    pub dz: f64,
    pub dtheta: f64,
}

pub fn profile_ode_rhs(state: &ShootingState, n: u32) -> Result<StateDerivative> {
    if !(state.r > 0.0) {
        return Err(Error::AxisCrossing {
            s: state.s,
            r: state.r,
        });
    }
    let (sin, cos) = state.theta.sin_cos();
    Ok(StateDerivative {
        dr: cos,
        dz: sin,
        dtheta: 0.5 * (state.r * sin - state.z * cos) - (n as f64 - 1.0) * sin / state.r,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Fixed RK4 arclength step.
    pub step: f64,
    /// Dimension of the shrinker (2 for surfaces in R³).
    pub dimension: u32,
    /// Orbits leaving this ball count as escaped.
    pub escape_radius: f64,
    pub max_arclength: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            step: 1e-3,
            dimension: 2,
            escape_radius: 20.0,
            max_arclength: 200.0,
        }
    }
}

/// How an integrated orbit ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitEnd {
    /// Crossed z = 0 downward after leaving the start.
    Returned,
    /// Came back to the start within the closure tolerance.
    Closed,
    Escaped,
    HitAxis,
    ArclengthExhausted,
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub end: OrbitEnd,
    pub last: ShootingState,
    /// States at every step, including the start and the located end point.
    pub states: Vec<ShootingState>,
}

fn advance(state: &ShootingState, d: &StateDerivative, h: f64) -> ShootingState {
    ShootingState {
        r: state.r + h * d.dr,
        z: state.z + h * d.dz,
        theta: state.theta + h * d.dtheta,
        s: state.s + h,
    }
}

/// One classical Runge–Kutta step of length h.
pub fn rk4_step(state: &ShootingState, h: f64, n: u32) -> Result<ShootingState> {
    let k1 = profile_ode_rhs(state, n)?;
    let k2 = profile_ode_rhs(&advance(state, &k1, h / 2.0), n)?;
    let k3 = profile_ode_rhs(&advance(state, &k2, h / 2.0), n)?;
    let k4 = profile_ode_rhs(&advance(state, &k3, h), n)?;
    let combine = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    Ok(ShootingState {
        r: state.r + h * combine(k1.dr, k2.dr, k3.dr, k4.dr),
        z: state.z + h * combine(k1.dz, k2.dz, k3.dz, k4.dz),
        theta: state.theta + h * combine(k1.dtheta, k2.dtheta, k3.dtheta, k4.dtheta),
        s: state.s + h,
    })
}

/// Finds the RK4 sub-step τ ∈ (0, h] from `state` landing on z = 0.
fn locate_plane_crossing(state: &ShootingState, h: f64, n: u32) -> Result<ShootingState> {
    let mut tau = h * state.z / (state.z - rk4_step(state, h, n)?.z);
    for _ in 0..8 {
        let trial = rk4_step(state, tau, n)?;
        let dz = trial.theta.sin();
        if dz.abs() < 1e-14 {
            break;
        }
        let next = (tau - trial.z / dz).clamp(0.0, h);
        if (next - tau).abs() < 1e-16 {
            tau = next;
            break;
        }
        tau = next;
    }
    let mut end = rk4_step(state, tau, n)?;
    end.z = 0.0;
    Ok(end)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    /// First downward crossing of z = 0.
    HalfOrbit,
    /// First upward crossing of z = 0 within `tol` of the start.
    FullOrbit { tol: f64 },
}

fn integrate(
    start: ShootingState,
    options: &ShootingOptions,
    stop: Stop,
    keep: bool,
) -> Result<Orbit> {
    if !(options.step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ODE step {} must be positive",
            options.step
        )));
    }
    let n = options.dimension;
    let h = options.step;
    let mut states = Vec::new();
    if keep {
        states.push(start);
    }
    let mut state = start;
    let finish = |end, last, mut states: Vec<ShootingState>| {
        if keep && states.last() != Some(&last) {
            states.push(last);
        }
        Ok(Orbit { end, last, states })
    };
    loop {
        if state.s - start.s >= options.max_arclength {
            return finish(OrbitEnd::ArclengthExhausted, state, states);
        }
        let next = match rk4_step(&state, h, n) {
            Ok(next) => next,
            Err(Error::AxisCrossing { .. }) => return finish(OrbitEnd::HitAxis, state, states),
            Err(e) => return Err(e),
        };
        if !(next.r.is_finite() && next.z.is_finite() && next.theta.is_finite()) {
            return Err(Error::Solver(format!(
                "orbit became non-finite at s = {}",
                state.s
            )));
        }
        if next.r <= 0.0 {
            return finish(OrbitEnd::HitAxis, state, states);
        }
        if next.r.hypot(next.z) > options.escape_radius {
            return finish(OrbitEnd::Escaped, next, states);
        }
        let left_start = state.s > start.s;
        match stop {
            Stop::HalfOrbit if left_start && state.z > 0.0 && next.z <= 0.0 => {
                let end = locate_plane_crossing(&state, h, n)?;
                if keep && end.s - state.s < 0.5 * h && states.len() > 1 {
                    // avoid a sliver segment next to the end point
                    states.pop();
                }
                return finish(OrbitEnd::Returned, end, states);
            }
            Stop::FullOrbit { tol } if left_start && state.z < 0.0 && next.z >= 0.0 => {
                let end = locate_plane_crossing(&state, h, n)?;
                if closure_defect(&start, &end) < tol {
                    return finish(OrbitEnd::Closed, end, states);
                }
            }
            _ => {}
        }
        if keep {
            states.push(next);
        }
        state = next;
    }
}

/// Follows the orbit from `start` until it closes up (within `tol`),
/// escapes, reaches the axis or runs out of arclength.
pub fn classify_orbit(start: ShootingState, options: &ShootingOptions, tol: f64) -> Result<Orbit> {
    integrate(start, options, Stop::FullOrbit { tol }, false)
}

/// |r_end − r_start| + |θ_end − θ_start mod 2π|.
pub fn closure_defect(start: &ShootingState, end: &ShootingState) -> f64 {
    let dtheta = (end.theta - start.theta).rem_euclid(2.0 * PI);
    (end.r - start.r).abs() + dtheta.min(2.0 * PI - dtheta)
}

fn plane_start(r: f64) -> ShootingState {
    ShootingState {
        r,
        z: 0.0,
        theta: FRAC_PI_2,
        s: 0.0,
    }
}

/// cos θ at the first return to z = 0 starting upward from (r, 0). It
/// vanishes exactly when the half orbit meets the plane perpendicularly,
/// which by the z ↦ −z symmetry closes the orbit.
pub fn closure_function(r_start: f64, options: &ShootingOptions) -> Result<f64> {
    let orbit = integrate(plane_start(r_start), options, Stop::HalfOrbit, false)?;
    match orbit.end {
        OrbitEnd::Returned => Ok(orbit.last.theta.cos()),
        end => Err(non_closing(r_start, end)),
    }
}

fn non_closing(r_start: f64, end: OrbitEnd) -> Error {
    let reason = match end {
        OrbitEnd::Escaped => "orbit escapes without returning to z = 0",
        OrbitEnd::HitAxis => "orbit reaches the axis",
        OrbitEnd::ArclengthExhausted => "arclength limit reached before returning to z = 0",
        OrbitEnd::Returned | OrbitEnd::Closed => "orbit returns but does not close",
    };
    Error::NonClosing {
        r_start,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedProfile {
    #[serde(skip)]
    pub profile: ProfileCurve,
    pub r_start: f64,
    /// Outer crossing of the plane z = 0.
    pub r_opposite: f64,
    pub max_height: f64,
    pub length: f64,
    /// Full-loop |r_return − r_start| + |θ_return − π/2 mod 2π|.
    pub closure_defect: f64,
    pub bisection_steps: usize,
}

/// Number of sub-intervals scanned for a sign change of the closure function.
const SCAN_INTERVALS: usize = 16;

/// Searches `r_range` for an orbit leaving z = 0 vertically upward that
/// closes up, and returns the closed profile oriented counter-clockwise.
pub fn shoot_closed_profile(
    r_range: (f64, f64),
    tol: f64,
    options: &ShootingOptions,
) -> Result<ClosedProfile> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let (lo, hi) = r_range;
    if !(lo <= hi) || !(lo > 0.0) {
        return Err(Error::Bracket {
            lo,
            hi,
            g_lo: f64::NAN,
            g_hi: f64::NAN,
        });
    }

    let r_star = if lo == hi {
        let g = closure_function(lo, options)?;
        if g.abs() > tol {
            return Err(Error::NonClosing {
                r_start: lo,
                reason: format!("return angle misses the perpendicular by cos θ = {g:e}"),
            });
        }
        (lo, 0)
    } else {
        let mut previous: Option<(f64, f64)> = None;
        let mut first_failure = None;
        let mut bracket = None;
        for k in 0..=SCAN_INTERVALS {
            let r = lo + (hi - lo) * k as f64 / SCAN_INTERVALS as f64;
            let g = match closure_function(r, options) {
                Ok(g) => g,
                Err(e @ Error::NonClosing { .. }) => {
                    first_failure.get_or_insert(e);
                    previous = None;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if let Some((rp, gp)) = previous {
                if gp == 0.0 || gp.signum() != g.signum() {
                    bracket = Some((rp, gp, r, g));
                    break;
                }
            }
            previous = Some((r, g));
        }
        match bracket {
            Some((a, ga, b, gb)) => bisect(a, ga, b, gb, options)?,
            None => {
                if let (Some(e), true) = (first_failure, previous.is_none()) {
                    return Err(e);
                }
                return Err(Error::Bracket {
                    lo,
                    hi,
                    g_lo: closure_function(lo, options).unwrap_or(f64::NAN),
                    g_hi: closure_function(hi, options).unwrap_or(f64::NAN),
                });
            }
        }
    };
    let (r_start, bisection_steps) = r_star;

    let half = integrate(plane_start(r_start), options, Stop::HalfOrbit, true)?;
    if half.end != OrbitEnd::Returned {
        return Err(non_closing(r_start, half.end));
    }
    let full = classify_orbit(plane_start(r_start), options, tol)?;
    if full.end != OrbitEnd::Closed {
        return Err(non_closing(r_start, full.end));
    }
    let defect = closure_defect(&plane_start(r_start), &full.last);

    // upper arc from the inner to the outer crossing, then its mirror image
    let upper: Vec<[f64; 2]> = half.states.iter().map(|s| [s.r, s.z]).collect();
    let mut loop_samples = upper.clone();
    loop_samples.extend(
        upper[1..upper.len() - 1]
            .iter()
            .rev()
            .map(|&[r, z]| [r, -z]),
    );
    let mut profile = ProfileCurve::new(loop_samples, true)?;
    if profile.signed_area() < 0.0 {
        profile = profile.reversed();
    }
    Ok(ClosedProfile {
        r_start,
        r_opposite: half.last.r,
        max_height: upper.iter().map(|p| p[1]).fold(0.0, f64::max),
        length: profile.length(),
        profile,
        closure_defect: defect,
        bisection_steps,
    })
}

/// Bisection on the closure function down to a bracket of a few ulps.
fn bisect(
    mut a: f64,
    mut ga: f64,
    mut b: f64,
    gb: f64,
    options: &ShootingOptions,
) -> Result<(f64, usize)> {
    if ga == 0.0 {
        return Ok((a, 0));
    }
    if gb == 0.0 {
        return Ok((b, 0));
    }
    let mut steps = 0;
    while steps < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = closure_function(mid, options)?;
        steps += 1;
        if gm == 0.0 {
            return Ok((mid, steps));
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinker::profile::revolve;
    use crate::shrinker::residual::residual;
    use crate::surface::{compute_geometry, genus};
    use std::f64::consts::SQRT_2;

    #[test]
    fn circle_of_radius_two_is_an_orbit() {
        let opts = ShootingOptions::default();
        let mut state = plane_start(2.0);
        for _ in 0..2000 {
            state = rk4_step(&state, opts.step, 2).unwrap();
            assert!((state.r.hypot(state.z) - 2.0).abs() < 1e-10);
            assert!((profile_ode_rhs(&state, 2).unwrap().dtheta - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn vertical_cylinder_line_is_an_equilibrium() {
        let state = ShootingState {
            r: SQRT_2,
            z: 0.3,
            theta: FRAC_PI_2,
            s: 0.0,
        };
        let d = profile_ode_rhs(&state, 2).unwrap();
        assert!(d.dtheta.abs() < 1e-15);
        let mut s = state;
        for _ in 0..5000 {
            s = rk4_step(&s, 1e-3, 2).unwrap();
        }
        assert!((s.r - SQRT_2).abs() < 1e-12 && (s.theta - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn axis_is_rejected() {
        let state = ShootingState {
            r: 0.0,
            z: 0.0,
            theta: 0.0,
            s: 1.5,
        };
        assert!(matches!(
            profile_ode_rhs(&state, 2),
            Err(Error::AxisCrossing { .. })
        ));
    }

    #[test]
    fn orbits_report_how_they_end() {
        let opts = ShootingOptions::default();
        let escaped = classify_orbit(plane_start(SQRT_2), &opts, 1e-8).unwrap();
        assert_eq!(escaped.end, OrbitEnd::Escaped);
        let sphere = classify_orbit(plane_start(2.0), &opts, 1e-8).unwrap();
        assert_eq!(sphere.end, OrbitEnd::HitAxis);
        let inward = ShootingState {
            r: 0.5,
            z: 0.0,
            theta: PI,
            s: 0.0,
        };
        assert_eq!(
            classify_orbit(inward, &opts, 1e-8).unwrap().end,
            OrbitEnd::HitAxis
        );
    }

    #[test]
    fn cylinder_start_is_non_closing() {
        let r = shoot_closed_profile((SQRT_2, SQRT_2), 1e-8, &ShootingOptions::default());
        assert!(matches!(r, Err(Error::NonClosing { .. })), "{r:?}");
    }

    #[test]
    fn empty_range_is_a_bracket_error() {
        let r = shoot_closed_profile((1.0, 0.5), 1e-8, &ShootingOptions::default());
        assert!(matches!(r, Err(Error::Bracket { .. })));
    }

    #[test]
    fn torus_profile_closes() {
        let torus = shoot_closed_profile((0.3, 1.2), 1e-8, &ShootingOptions::default()).unwrap();
        assert!(torus.closure_defect < 1e-8);
        assert!(torus.profile.is_closed());
        assert!(torus.profile.signed_area() > 0.0);
        assert!(torus.r_start < torus.r_opposite);
    }

    #[test]
    fn revolved_torus_is_a_genus_one_shrinker() {
        let torus = shoot_closed_profile((0.3, 1.2), 1e-8, &ShootingOptions::default()).unwrap();
        let m = 256;
        let mesh = revolve(&torus.profile.resampled_for_revolution(m, 1e-3).unwrap(), m).unwrap();
        assert!(mesh.is_closed());
        assert_eq!(genus(&mesh).unwrap(), 1);
        let geom = compute_geometry(&mesh).unwrap();
        let res = residual(&mesh, &geom).unwrap();
        assert!(res.norm_inf < 1e-3, "{}", res.norm_inf);
    }

    #[test]
    fn shooting_is_stable_under_step_halving() {
        let tol = 1e-8;
        let coarse = ShootingOptions::default();
        let fine = ShootingOptions {
            step: coarse.step / 2.0,
            ..coarse
        };
        let a = shoot_closed_profile((0.3, 1.2), tol, &coarse).unwrap();
        let b = shoot_closed_profile((0.3, 1.2), tol, &fine).unwrap();
        assert!((a.r_start - b.r_start).abs() < 2.0 * tol);
        assert!((a.r_opposite - b.r_opposite).abs() < 2.0 * tol);
    }
}
