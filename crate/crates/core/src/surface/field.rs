use std::ops::Index;
use std::path::Path;

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

/// Per-vertex (or per-profile-sample) scalar values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        ScalarField(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ScalarField(vec![c; n])
    }

    /// Samples `f` at every mesh vertex.
    pub fn from_fn(mesh: &TriMesh, f: impl Fn(usize, &Vec3) -> f64) -> Self {
        ScalarField(
            mesh.vertices()
                .iter()
                .enumerate()
                .map(|(i, x)| f(i, x))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.0.len() == expected {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected,
                found: self.0.len(),
            })
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl From<Vec<f64>> for ScalarField {
    fn from(v: Vec<f64>) -> Self {
        ScalarField(v)
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Operator output: values at every vertex, of which only interior vertices
/// (full one-ring) are trusted.
#[derive(Debug, Clone)]
pub struct OperatorField {
    values: Vec<f64>,
    trusted: Vec<bool>,
}

impl OperatorField {
    pub(crate) fn new(values: Vec<f64>, mesh: &TriMesh) -> Self {
        let trusted = mesh.boundary_flags().iter().map(|b| !b).collect();
        OperatorField { values, trusted }
    }

    /// Value at an interior vertex; boundary vertices are an error.
    pub fn at(&self, v: usize) -> Result<f64> {
        if self.trusted[v] {
            Ok(self.values[v])
        } else {
            Err(Error::Boundary(v))
        }
    }

    pub fn is_trusted(&self, v: usize) -> bool {
        self.trusted[v]
    }

    /// All values, boundary entries included, for callers that track the flags.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn trusted_flags(&self) -> &[bool] {
        &self.trusted
    }

    /// Interior values with boundary entries replaced by zero.
    pub fn interior(&self) -> ScalarField {
        ScalarField(
            self.values
                .iter()
                .zip(&self.trusted)
                .map(|(&v, &t)| if t { v } else { 0.0 })
                .collect(),
        )
    }

    pub fn interior_max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.trusted)
            .filter(|(_, &t)| t)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }
}

/// (1 − |x − c|²/ρ²)³ inside the ball of radius ρ about c, zero outside.
/// Twice continuously differentiable.
pub fn bump(x: &Vec3, center: &Vec3, radius: f64) -> f64 {
    let t = (x - center).norm_squared() / (radius * radius);
    if t < 1.0 {
        (1.0 - t).powi(3)
    } else {
        0.0
    }
}

/// Deterministic smooth field: five random plane waves with frequencies
/// |ω| ≤ 1.5, times [`bump`] about the origin with radius `support_radius`.
pub fn smooth_random_field(mesh: &TriMesh, seed: u64, support_radius: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, Vec3, f64)> = (0..5)
        .map(|_| {
            let amp = rng.random_range(-1.0..1.0);
            let dir = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let omega = dir.normalize() * rng.random_range(0.0..1.5);
            (amp, omega, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let offset = rng.random_range(-1.0..1.0);
    ScalarField::from_fn(mesh, |_, x| {
        let wave: f64 = waves
            .iter()
            .map(|(a, w, phi)| a * (w.dot(x) + phi).sin())
            .sum();
        (offset + wave) * bump(x, &Vec3::zeros(), support_radius)
    })
}

#[derive(Serialize)]
struct FieldRow {
    vertex_id: usize,
    x: f64,
    y: f64,
    z: f64,
    value: f64,
}

/// Writes `vertex_id,x,y,z,value` rows.
pub fn write_field_csv(path: impl AsRef<Path>, mesh: &TriMesh, field: &[f64]) -> Result<()> {
    if field.len() != mesh.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: mesh.vertex_count(),
            found: field.len(),
        });
    }
    let mut w = csv::Writer::from_path(path)?;
    for (i, (x, &value)) in mesh.vertices().iter().zip(field).enumerate() {
        w.serialize(FieldRow {
            vertex_id: i,
            x: x.x,
            y: x.y,
            z: x.z,
            value,
        })?;
    }
    w.flush()?;
    Ok(())
}
