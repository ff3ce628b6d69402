//! Generating curves of surfaces of revolution about the z-axis and the
//! mesh they sweep out.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::mesh::{TriMesh, Vec3};

/// Sampled curve (r, z) in the half-plane r ≥ 0.
///
/// Interior samples satisfy r > 0. An open curve may start or end exactly on
/// the axis (r = 0); revolving such an end produces a pole vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    samples: Vec<[f64; 2]>,
    closed: bool,
}

/// One row of the profile CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    pub theta: f64,
}

impl ProfileCurve {
    pub fn new(samples: Vec<[f64; 2]>, closed: bool) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidArgument(
                "a profile needs at least 3 samples".into(),
            ));
        }
        let last = samples.len() - 1;
        for (i, &[r, z]) in samples.iter().enumerate() {
            if !r.is_finite() || !z.is_finite() {
                return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
            }
            let on_axis_end = !closed && (i == 0 || i == last) && r == 0.0;
            if r <= 0.0 && !on_axis_end {
                return Err(Error::AxisCrossing { s: i as f64, r });
            }
        }
        for i in 0..last {
            if samples[i] == samples[i + 1] {
                return Err(Error::InvalidArgument(format!(
                    "samples {i} and {} coincide",
                    i + 1
                )));
            }
        }
        if closed && samples[0] == samples[last] {
            return Err(Error::InvalidArgument(
                "closed profiles must not repeat the first sample".into(),
            ));
        }
        Ok(ProfileCurve { samples, closed })
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn starts_on_axis(&self) -> bool {
        !self.closed && self.samples[0][0] == 0.0
    }

    pub fn ends_on_axis(&self) -> bool {
        !self.closed && self.samples[self.samples.len() - 1][0] == 0.0
    }

    fn segment_count(&self) -> usize {
        if self.closed {
            self.samples.len()
        } else {
            self.samples.len() - 1
        }
    }

    fn point(&self, i: usize) -> [f64; 2] {
        self.samples[i % self.samples.len()]
    }

    /// Chord-length arclength at every sample (closed curves start at 0 and
    /// do not include the closing segment).
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.samples.len());
        s.push(0.0);
        for i in 1..self.samples.len() {
            let [r0, z0] = self.samples[i - 1];
            let [r1, z1] = self.samples[i];
            s.push(s[i - 1] + (r1 - r0).hypot(z1 - z0));
        }
        s
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let [r0, z0] = self.point(i);
                let [r1, z1] = self.point(i + 1);
                (r1 - r0).hypot(z1 - z0)
            })
            .sum()
    }

    /// Signed area enclosed by a closed profile (positive when counter-clockwise
    /// in the (r, z) plane). Zero for open curves.
    pub fn signed_area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        let n = self.samples.len();
        (0..n)
            .map(|i| {
                let [r0, z0] = self.samples[i];
                let [r1, z1] = self.samples[(i + 1) % n];
                r0 * z1 - r1 * z0
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        ProfileCurve {
            samples,
            closed: self.closed,
        }
    }

    /// Per-sample tangent angle θ and curvature dθ/ds from the circle through
    /// each sample and its two neighbours (one-sided at open ends).
    pub fn tangent_and_curvature(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.samples.len();
        let mut theta = vec![0.0; n];
        let mut kappa = vec![0.0; n];
        for i in 0..n {
            let (a, b, c, at) = if self.closed {
                (self.point(i + n - 1), self.samples[i], self.point(i + 1), 1)
            } else if i == 0 {
                (self.samples[0], self.samples[1], self.samples[2], 0)
            } else if i == n - 1 {
                (
                    self.samples[n - 3],
                    self.samples[n - 2],
                    self.samples[n - 1],
                    2,
                )
            } else {
                (self.samples[i - 1], self.samples[i], self.samples[i + 1], 1)
            };
            let (t, k) = circle_tangent(a, b, c, at);
            theta[i] = t;
            kappa[i] = k;
        }
        unwrap_angles(&mut theta);
        (theta, kappa)
    }

    pub fn rows(&self) -> Vec<ProfileRow> {
        let s = self.arclength();
        let (theta, _) = self.tangent_and_curvature();
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &[r, z])| ProfileRow {
                s: s[i],
                r,
                z,
                theta: theta[i],
            })
            .collect()
    }

    /// Writes the `s,r,z,theta` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Keeps samples with |z| ≤ `z_max` (open curves only); used for
    /// truncating noncompact profiles.
    pub fn truncated(&self, z_max: f64) -> Result<Self> {
        if self.closed {
            return Ok(self.clone());
        }
        let samples: Vec<[f64; 2]> = self
            .samples
            .iter()
            .copied()
            .filter(|s| s[1].abs() <= z_max + 1e-12 * z_max.max(1.0))
            .collect();
        ProfileCurve::new(samples, false)
    }

    /// Resamples at `count` points equally spaced in chord arclength using
    /// linear interpolation between existing samples.
    pub fn resampled(&self, count: usize) -> Result<Self> {
        self.resample_with(count, |_| 1.0)
    }

    /// Resamples so that revolving with `angular_resolution` points per ring
    /// gives roughly equilateral triangles: the spacing along the curve is
    /// about √3/2 times the ring spacing r·2π/m (never below `min_spacing`).
    pub fn resampled_for_revolution(
        &self,
        angular_resolution: usize,
        min_spacing: f64,
    ) -> Result<Self> {
        if !(min_spacing > 0.0) || angular_resolution == 0 {
            return Err(Error::InvalidArgument("spacing must be positive".into()));
        }
        let c = 3f64.sqrt() / 2.0 * 2.0 * PI / angular_resolution as f64;
        let density = |r: f64| 1.0 / (c * r).max(min_spacing);
        let (cumulative, _) = self.warped_length(density);
        let total = cumulative[cumulative.len() - 1];
        let count = (total.round() as usize + usize::from(!self.closed)).max(3);
        self.resample_with(count, density)
    }

    /// Cumulative ∫ density(r) ds along the chords, with the plain chord lengths.
    fn warped_length(&self, density: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let segs = self.segment_count();
        let mut cumulative = vec![0.0; segs + 1];
        let mut chord = vec![0.0; segs];
        for i in 0..segs {
            let [r0, z0] = self.point(i);
            let [r1, z1] = self.point(i + 1);
            chord[i] = (r1 - r0).hypot(z1 - z0);
            cumulative[i + 1] = cumulative[i] + chord[i] * density(0.5 * (r0 + r1));
        }
        (cumulative, chord)
    }

    /// The curve with the cubic Hermite midpoint of every segment inserted
    /// (2N − 1 samples when open, 2N when closed).
    pub fn refined(&self) -> Result<Self> {
        let (theta, _) = self.tangent_and_curvature();
        let segs = self.segment_count();
        let mut out = Vec::with_capacity(2 * self.samples.len());
        for seg in 0..segs {
            let [r0, z0] = self.point(seg);
            let [r1, z1] = self.point(seg + 1);
            out.push(self.samples[seg]);
            out.push(self.hermite(seg, 0.5, &theta, (r1 - r0).hypot(z1 - z0)));
        }
        if !self.closed {
            out.push(self.samples[self.samples.len() - 1]);
        }
        ProfileCurve::new(out, self.closed)
    }

    /// Cubic Hermite point at fraction t of segment `seg`, using the sample
    /// tangents; keeps resampled curves smooth to third order.
    fn hermite(&self, seg: usize, t: f64, theta: &[f64], chord: f64) -> [f64; 2] {
        let n = self.samples.len();
        let p0 = self.point(seg);
        let p1 = self.point(seg + 1);
        let (s0, c0) = theta[seg % n].sin_cos();
        let (s1, c1) = theta[(seg + 1) % n].sin_cos();
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        [
            h00 * p0[0] + h10 * chord * c0 + h01 * p1[0] + h11 * chord * c1,
            h00 * p0[1] + h10 * chord * s0 + h01 * p1[1] + h11 * chord * s1,
        ]
    }

    fn resample_with(&self, count: usize, density: impl Fn(f64) -> f64) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidArgument(format!(
                "cannot resample to {count} points"
            )));
        }
        let (cumulative, chord) = self.warped_length(density);
        let (theta, _) = self.tangent_and_curvature();
        let segs = self.segment_count();
        let total = cumulative[segs];
        let divisions = if self.closed { count } else { count - 1 };
        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        for k in 0..count {
            let target = total * k as f64 / divisions as f64;
            while seg + 1 < segs && cumulative[seg + 1] < target {
                seg += 1;
            }
            let len = cumulative[seg + 1] - cumulative[seg];
            let t = ((target - cumulative[seg]) / len).clamp(0.0, 1.0);
            out.push(self.hermite(seg, t, &theta, chord[seg]));
        }
        if !self.closed {
            // keep exact endpoints (axis poles must stay on the axis)
            out[0] = self.samples[0];
            out[count - 1] = self.samples[self.samples.len() - 1];
        }
        ProfileCurve::new(out, self.closed)
    }

    /// Circle of radius `radius` centred at the origin, from the south pole to
    /// the north pole (counter-clockwise, outward normal after revolving).
    pub fn sphere(radius: f64, samples: usize) -> Result<Self> {
        let n = samples.max(3);
        let pts = (0..n)
            .map(|i| {
                let phi = -PI / 2.0 + PI * i as f64 / (n - 1) as f64;
                let r = if i == 0 || i == n - 1 {
                    0.0
                } else {
                    radius * phi.cos()
                };
                [r, radius * phi.sin()]
            })
            .collect();
        ProfileCurve::new(pts, false)
    }

    /// Vertical segment r = `radius`, z ∈ [−half_length, half_length].
    pub fn cylinder(radius: f64, half_length: f64, samples: usize) -> Result<Self> {
        let n = samples.max(3);
        let pts = (0..n)
            .map(|i| {
                [
                    radius,
                    -half_length + 2.0 * half_length * i as f64 / (n - 1) as f64,
                ]
            })
            .collect();
        ProfileCurve::new(pts, false)
    }
}

/// Tangent angle at point index `at` (0, 1, 2) of the circle through a, b, c,
/// plus the signed curvature (positive when turning counter-clockwise).
fn circle_tangent(a: [f64; 2], b: [f64; 2], c: [f64; 2], at: usize) -> (f64, f64) {
    let p = [a, b, c][at];
    let chord = [c[0] - a[0], c[1] - a[1]];
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let scale = chord[0].hypot(chord[1]);
    if d.abs() <= 1e-14 * scale * scale {
        return (chord[1].atan2(chord[0]), 0.0);
    }
    let sq = |q: [f64; 2]| q[0] * q[0] + q[1] * q[1];
    let cx = (sq(a) * (b[1] - c[1]) + sq(b) * (c[1] - a[1]) + sq(c) * (a[1] - b[1])) / d;
    let cy = (sq(a) * (c[0] - b[0]) + sq(b) * (a[0] - c[0]) + sq(c) * (b[0] - a[0])) / d;
    let (rx, ry) = (p[0] - cx, p[1] - cy);
    let radius = rx.hypot(ry);
    // counter-clockwise turning (d > 0) puts the centre on the left
    let (tx, ty) = if d > 0.0 { (-ry, rx) } else { (ry, -rx) };
    (ty.atan2(tx), d.signum() / radius)
}

fn unwrap_angles(theta: &mut [f64]) {
    for i in 1..theta.len() {
        while theta[i] - theta[i - 1] > PI {
            theta[i] -= 2.0 * PI;
        }
        while theta[i] - theta[i - 1] < -PI {
            theta[i] += 2.0 * PI;
        }
    }
}

/// Surface of revolution of `profile` about the z-axis with
/// `angular_resolution` vertices per ring. Alternate rings are rotated by half
/// an angular step so each interior vertex sees a mirror-symmetric one-ring.
///
/// The triangle winding makes the normal (sin θ, −cos θ) in the (r, z) plane,
/// i.e. outward for counter-clockwise profiles.
pub fn revolve(profile: &ProfileCurve, angular_resolution: usize) -> Result<TriMesh> {
    if angular_resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "angular resolution {angular_resolution} is below 8"
        )));
    }
    let m = angular_resolution;
    let dphi = 2.0 * PI / m as f64;
    let samples = profile.samples();
    let count = samples.len();
    let south_pole = profile.starts_on_axis();
    let north_pole = profile.ends_on_axis();
    let ring_range = (south_pole as usize)..(count - north_pole as usize);

    let mut vertices = Vec::new();
    let mut ring_start = vec![usize::MAX; count];
    let mut ring_phase = vec![0.0; count];
    for j in ring_range.clone() {
        let [r, z] = samples[j];
        let phase = if j % 2 == 1 { 0.5 } else { 0.0 };
        ring_start[j] = vertices.len();
        ring_phase[j] = phase;
        for i in 0..m {
            let phi = (i as f64 + phase) * dphi;
            vertices.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        }
    }

    let mut triangles = Vec::new();
    let strip = |a: usize, b: usize, tris: &mut Vec<[usize; 3]>| {
        zip_rings(
            ring_start[a],
            ring_phase[a],
            ring_start[b],
            ring_phase[b],
            m,
            tris,
        );
    };
    let rings: Vec<usize> = ring_range.collect();
    for w in rings.windows(2) {
        strip(w[0], w[1], &mut triangles);
    }
    if profile.is_closed() {
        strip(rings[rings.len() - 1], rings[0], &mut triangles);
    }
    if south_pole {
        let pole = vertices.len();
        vertices.push(Vec3::new(0.0, 0.0, samples[0][1]));
        let first = ring_start[rings[0]];
        for i in 0..m {
            triangles.push([pole, first + (i + 1) % m, first + i]);
        }
    }
    if north_pole {
        let pole = vertices.len();
        vertices.push(Vec3::new(0.0, 0.0, samples[count - 1][1]));
        let last = ring_start[rings[rings.len() - 1]];
        for i in 0..m {
            triangles.push([pole, last + i, last + (i + 1) % m]);
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Triangulates the band between two rings of `m` vertices whose angular
/// phases (in units of the angular step) may differ, walking both rings in
/// angle order. Ring `a` comes before ring `b` along the profile.
fn zip_rings(a0: usize, pa: f64, b0: usize, pb: f64, m: usize, tris: &mut Vec<[usize; 3]>) {
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < m || ib < m {
        let next_a = ia as f64 + 1.0 + pa;
        let next_b = ib as f64 + 1.0 + pb;
        let advance_a = if ia >= m {
            false
        } else if ib >= m {
            true
        } else {
            next_a <= next_b + 1e-12
        };
        if advance_a {
            tris.push([a0 + ia % m, a0 + (ia + 1) % m, b0 + ib % m]);
            ia += 1;
        } else {
            tris.push([b0 + ib % m, a0 + ia % m, b0 + (ib + 1) % m]);
            ib += 1;
        }
    }
}
