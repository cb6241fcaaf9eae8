//! Bending angle from two terminal nodes.

use serde::{Deserialize, Serialize};

use super::PostprocessError;
use crate::geometry::ActuatorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeHistory {
    pub node_id: u64,
    pub initial: [f64; 3],
    /// `(t, u)` with strictly increasing `t`.
    pub samples: Vec<(f64, [f64; 3])>,
}

impl NodeHistory {
    pub fn new(node_id: u64, initial: [f64; 3], samples: Vec<(f64, [f64; 3])>) -> Result<Self, PostprocessError> {
        let h = Self { node_id, initial, samples };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), PostprocessError> {
        let bad = |detail: &str| PostprocessError::InvalidHistory { node: self.node_id, detail: detail.into() };
        if self.samples.is_empty() {
            return Err(bad("no samples"));
        }
        if self.initial.iter().any(|c| !c.is_finite()) {
            return Err(bad("non-finite initial coordinate"));
        }
        if self.samples.iter().any(|(t, u)| !t.is_finite() || u.iter().any(|c| !c.is_finite())) {
            return Err(bad("non-finite sample"));
        }
        if self.samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(bad("times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    /// Displacement at `t`, linearly interpolated. A history whose first
    /// sample comes after `t = 0` is taken to start from rest at `t = 0`.
    pub fn displacement(&self, t: f64) -> Result<[f64; 3], PostprocessError> {
        self.validate()?;
        let first = self.samples[0].0;
        let last = self.samples[self.samples.len() - 1].0;
        let start = first.min(0.0);
        if !(t >= start && t <= last) {
            return Err(PostprocessError::OutOfRange { t, start, end: last });
        }
        if t < first {
            let f = t / first;
            let u = self.samples[0].1;
            return Ok([u[0] * f, u[1] * f, u[2] * f]);
        }
        let i = self.samples.partition_point(|s| s.0 <= t);
        if i == self.samples.len() {
            return Ok(self.samples[i - 1].1);
        }
        let (t0, u0) = self.samples[i - 1];
        let (t1, u1) = self.samples[i];
        let f = (t - t0) / (t1 - t0);
        Ok([u0[0] + f * (u1[0] - u0[0]), u0[1] + f * (u1[1] - u0[1]), u0[2] + f * (u1[2] - u0[2])])
    }

    pub fn position(&self, t: f64) -> Result<[f64; 3], PostprocessError> {
        let u = self.displacement(t)?;
        Ok([self.initial[0] + u[0], self.initial[1] + u[1], self.initial[2] + u[2]])
    }
}

/// Midpoint of the flat-side edge of the fixed base.
pub fn reference_point(spec: &ActuatorSpec) -> [f64; 3] {
    [0.0, spec.flat_y, 0.0]
}

/// Angle in degrees between the initial and current reference-to-tip
/// vectors.
pub fn bending_angle(reference: [f64; 3], tip: &NodeHistory, t: f64) -> Result<f64, PostprocessError> {
    let p = tip.position(t)?;
    let v0 = sub(tip.initial, reference);
    let v = sub(p, reference);
    let scale = norm(v0).max(norm(v));
    if norm(v0) <= 1e-12 * scale.max(1.0) || norm(v) <= 1e-12 * scale.max(1.0) {
        return Err(PostprocessError::ZeroLengthVector);
    }
    let c = cross(v0, v);
    let d = v0[0] * v[0] + v0[1] * v[1] + v0[2] * v[2];
    Ok(norm(c).atan2(d).to_degrees())
}

/// θ at every sample time of the tip history.
pub fn angle_history(reference: [f64; 3], tip: &NodeHistory) -> Result<Vec<(f64, f64)>, PostprocessError> {
    tip.samples.iter().map(|&(t, _)| Ok((t, bending_angle(reference, tip, t)?))).collect()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
