//! Hysteresis between inflation and deflation angle curves.

use serde::{Deserialize, Serialize};

use super::PostprocessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSeries {
    pub pressures: Vec<f64>,
    pub theta: Vec<f64>,
}

impl AngleSeries {
    pub fn new(pressures: Vec<f64>, theta: Vec<f64>) -> Result<Self, PostprocessError> {
        if pressures.len() != theta.len() {
            return Err(PostprocessError::Mismatch(format!(
                "{} pressures against {} angles",
                pressures.len(),
                theta.len()
            )));
        }
        Ok(Self { pressures, theta })
    }

    /// Same samples ordered by ascending pressure.
    pub fn sorted(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.pressures.len()).collect();
        idx.sort_by(|&a, &b| self.pressures[a].total_cmp(&self.pressures[b]));
        Self {
            pressures: idx.iter().map(|&i| self.pressures[i]).collect(),
            theta: idx.iter().map(|&i| self.theta[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisResult {
    /// Largest backward/forward gap as a percentage of the forward peak.
    pub ratio_pct: f64,
    /// `(pressure, |θ_bwd − θ_fwd|)` in ascending pressure.
    pub gap: Vec<(f64, f64)>,
    /// Area between the curves as a percentage of the area under the
    /// forward curve, trapezoidal in pressure.
    pub loop_area_ratio_pct: f64,
}

/// Both series are matched by pressure after sorting; the deflation leg may
/// be given in descending order.
pub fn hysteresis_ratio(forward: &AngleSeries, backward: &AngleSeries) -> Result<HysteresisResult, PostprocessError> {
    for s in [forward, backward] {
        if s.pressures.len() != s.theta.len() {
            return Err(PostprocessError::Mismatch("pressure and angle counts differ".into()));
        }
    }
    if forward.pressures.is_empty() {
        return Err(PostprocessError::Empty("forward series".into()));
    }
    let f = forward.sorted();
    let b = backward.sorted();
    if f.pressures.len() != b.pressures.len()
        || f.pressures.iter().zip(&b.pressures).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0))
    {
        return Err(PostprocessError::Mismatch("forward and backward pressure grids differ".into()));
    }
    let peak = f.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(PostprocessError::Mismatch("forward curve has no positive angle".into()));
    }
    let gap: Vec<(f64, f64)> =
        f.pressures.iter().zip(f.theta.iter().zip(&b.theta)).map(|(&p, (x, y))| (p, (y - x).abs())).collect();
    let max_gap = gap.iter().map(|g| g.1).fold(0.0, f64::max);
    let trapz = |ys: &[f64]| -> f64 {
        f.pressures.windows(2).zip(ys.windows(2)).map(|(p, y)| 0.5 * (p[1] - p[0]) * (y[0] + y[1])).sum()
    };
    let gaps: Vec<f64> = gap.iter().map(|g| g.1).collect();
    let under = trapz(&f.theta);
    let loop_area_ratio_pct = if under > 0.0 { 100.0 * trapz(&gaps) / under } else { 0.0 };
    Ok(HysteresisResult { ratio_pct: 100.0 * max_gap / peak, gap, loop_area_ratio_pct })
}
