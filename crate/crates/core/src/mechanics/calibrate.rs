//! Fitting the model constants to reference results.
//!
//! Angle anchors fix the drive gain (one anchor) or the gain together with
//! `n0` (two or more, by coordinate descent with golden-section line
//! searches in log space). Twist and expansion scales enter their outputs
//! linearly and are fitted in closed form afterwards.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::fiberpath::{HelixStyle, WindingSpec};
use crate::geometry::ActuatorSpec;
use crate::materials::MaterialLibrary;
use crate::postprocess::PressureSchedule;

use super::{MechanicsError, Prepared, SegmentModel};

pub const MAX_EVALUATIONS: usize = 10_000;

/// A Geometry A winding configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub style: HelixStyle,
    pub turns: u32,
    #[serde(default)]
    pub halved_fibre: bool,
}

impl ConfigKey {
    pub const fn new(style: HelixStyle, turns: u32) -> Self {
        Self { style, turns, halved_fibre: false }
    }

    pub fn label(&self) -> String {
        format!("{}{}{}", self.style, self.turns, if self.halved_fibre { "h" } else { "" })
    }

    pub fn winding(&self, spec: &ActuatorSpec) -> WindingSpec {
        let mut w = WindingSpec::for_spec(spec, self.style, self.turns);
        w.halved_fibre_radius = self.halved_fibre;
        w
    }

    /// Parses labels such as `SH30`, `dh100` or `DH30h`.
    pub fn parse(label: &str) -> Result<Self, String> {
        let l = label.trim();
        if l.len() < 3 || !l.is_char_boundary(2) {
            return Err(format!("bad configuration label '{label}'"));
        }
        let style = l[..2].parse::<HelixStyle>()?;
        let rest = &l[2..];
        let (digits, halved) = match rest.strip_suffix(['h', 'H']) {
            Some(d) => (d, true),
            None => (rest, false),
        };
        let turns = digits.parse::<u32>().map_err(|_| format!("bad turn count in '{label}'"))?;
        Ok(Self { style, turns, halved_fibre: halved })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anchor {
    Theta { config: ConfigKey, pressure_kpa: f64, theta_deg: f64 },
    Twist { config: ConfigKey, pressure_kpa: f64, twist_pct: f64 },
    Expansion { config: ConfigKey, pressure_kpa: f64, expansion_mm: f64 },
}

impl Anchor {
    fn parts(&self) -> (&'static str, ConfigKey, f64, f64) {
        match *self {
            Anchor::Theta { config, pressure_kpa, theta_deg } => ("theta", config, pressure_kpa, theta_deg),
            Anchor::Twist { config, pressure_kpa, twist_pct } => ("twist", config, pressure_kpa, twist_pct),
            Anchor::Expansion { config, pressure_kpa, expansion_mm } => {
                ("expansion", config, pressure_kpa, expansion_mm)
            }
        }
    }
}

/// Reference finite element bending angles for Geometry A: configuration,
/// evaluation pressure in kPa, and angle in degrees. The 9 and 18 turn
/// single helices were reported at the pressure where their analyses
/// aborted.
pub const REFERENCE_ANGLES: [(ConfigKey, f64, f64); 9] = [
    (ConfigKey::new(HelixStyle::Sh, 9), 62.0, 61.12),
    (ConfigKey::new(HelixStyle::Sh, 18), 93.0, 86.12),
    (ConfigKey::new(HelixStyle::Sh, 30), 100.0, 90.00),
    (ConfigKey::new(HelixStyle::Sh, 50), 100.0, 106.04),
    (ConfigKey::new(HelixStyle::Sh, 100), 100.0, 148.80),
    (ConfigKey { style: HelixStyle::Dh, turns: 30, halved_fibre: true }, 100.0, 98.72),
    (ConfigKey::new(HelixStyle::Dh, 30), 100.0, 99.05),
    (ConfigKey::new(HelixStyle::Dh, 50), 100.0, 98.13),
    (ConfigKey::new(HelixStyle::Dh, 100), 100.0, 180.00),
];

pub fn default_anchors() -> Vec<Anchor> {
    vec![
        Anchor::Theta { config: ConfigKey::new(HelixStyle::Sh, 30), pressure_kpa: 100.0, theta_deg: 90.0 },
        Anchor::Twist { config: ConfigKey::new(HelixStyle::Sh, 100), pressure_kpa: 100.0, twist_pct: 2.06 },
        Anchor::Expansion { config: ConfigKey::new(HelixStyle::Sh, 18), pressure_kpa: 93.0, expansion_mm: 2.6 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorResidual {
    pub kind: String,
    pub config: String,
    pub pressure_kpa: f64,
    pub target: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: SegmentModel,
    pub residuals: Vec<AnchorResidual>,
    pub evaluations: usize,
}

struct Evaluator<'a> {
    prepared: Vec<(ConfigKey, Prepared)>,
    count: &'a Cell<usize>,
}

impl Evaluator<'_> {
    fn get(&self, key: ConfigKey) -> &Prepared {
        &self.prepared.iter().find(|(k, _)| *k == key).expect("prepared").1
    }

    fn theta(&self, key: ConfigKey, p: f64, seg: &SegmentModel) -> Result<f64, MechanicsError> {
        let n = self.count.get() + 1;
        self.count.set(n);
        if n > MAX_EVALUATIONS {
            return Err(MechanicsError::NonConvergence { evaluations: n - 1 });
        }
        Ok(self.get(key).point(p, seg)?.theta_deg)
    }
}

/// Golden-section minimum of `f` on `[a, b]`.
fn golden(
    mut f: impl FnMut(f64) -> Result<f64, MechanicsError>,
    mut a: f64,
    mut b: f64,
    iterations: usize,
) -> Result<f64, MechanicsError> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Fits the constants of `start` to `anchors`. Deterministic: identical
/// inputs give bit-identical constants.
pub fn calibrate(
    spec: &ActuatorSpec,
    materials: &MaterialLibrary,
    anchors: &[Anchor],
    start: &SegmentModel,
) -> Result<CalibrationReport, MechanicsError> {
    if anchors.is_empty() {
        return Err(MechanicsError::InvalidModel("calibration needs at least one anchor".into()));
    }
    start.validate()?;
    let count = Cell::new(0);
    let mut keys: Vec<ConfigKey> = anchors.iter().map(|a| a.parts().1).collect();
    keys.sort();
    keys.dedup();
    let mut prepared = Vec::with_capacity(keys.len());
    for k in keys {
        prepared.push((k, Prepared::new(spec, &[k.winding(spec)], materials, start)?));
    }
    let ev = Evaluator { prepared, count: &count };
    let mut model = start.clone();

    let thetas: Vec<(ConfigKey, f64, f64)> = anchors
        .iter()
        .filter_map(|a| match *a {
            Anchor::Theta { config, pressure_kpa, theta_deg } => Some((config, pressure_kpa, theta_deg)),
            _ => None,
        })
        .collect();

    if let Some(&(key, p, target)) = thetas.first() {
        model.drive_gain = fit_gain(&ev, key, p, target, &model)?;
    }
    if thetas.len() >= 2 {
        let sse = |m: &SegmentModel| -> Result<f64, MechanicsError> {
            let mut s = 0.0;
            for &(k, p, t) in &thetas {
                let d = ev.theta(k, p, m)? - t;
                s += d * d;
            }
            Ok(s)
        };
        let mut best = sse(&model)?;
        for _round in 0..25 {
            let g0 = model.drive_gain.ln();
            let lg = golden(
                |x| {
                    let m = SegmentModel { drive_gain: x.exp(), ..model.clone() };
                    sse(&m)
                },
                g0 - 8f64.ln(),
                g0 + 8f64.ln(),
                40,
            )?;
            model.drive_gain = lg.exp();
            let ln0 = golden(
                |x| {
                    let m = SegmentModel { n0: x.exp(), ..model.clone() };
                    sse(&m)
                },
                0.0,
                1000f64.ln(),
                40,
            )?;
            model.n0 = ln0.exp();
            let now = sse(&model)?;
            let improved = best - now;
            best = best.min(now);
            if improved.abs() <= 1e-12 * (1.0 + now) {
                break;
            }
        }
    }

    // linear scales in closed form
    let mut twist_num = 0.0;
    let mut twist_den = 0.0;
    let mut exp_num = 0.0;
    let mut exp_den = 0.0;
    let unit = SegmentModel { k_twist: 1.0, expansion_scale: 1.0, ..model.clone() };
    for a in anchors {
        match *a {
            Anchor::Twist { config, pressure_kpa, twist_pct } => {
                count.set(count.get() + 1);
                let raw = ev.get(config).point(pressure_kpa, &unit)?.twist_pct;
                twist_num += raw * twist_pct;
                twist_den += raw * raw;
            }
            Anchor::Expansion { config, pressure_kpa, expansion_mm } => {
                let raw = ev.get(config).expansion(pressure_kpa, &unit);
                exp_num += raw * expansion_mm;
                exp_den += raw * raw;
            }
            Anchor::Theta { .. } => {}
        }
    }
    if twist_den > 0.0 {
        model.k_twist = twist_num / twist_den;
    }
    if exp_den > 0.0 {
        model.expansion_scale = exp_num / exp_den;
    }

    let mut residuals = Vec::with_capacity(anchors.len());
    for a in anchors {
        let (kind, key, p, target) = a.parts();
        let st = ev.get(key).point(p, &model)?;
        let predicted = match a {
            Anchor::Theta { .. } => st.theta_deg,
            Anchor::Twist { .. } => st.twist_pct,
            Anchor::Expansion { .. } => st.expansion_mm,
        };
        residuals.push(AnchorResidual { kind: kind.into(), config: key.label(), pressure_kpa: p, target, predicted });
    }
    Ok(CalibrationReport { model, residuals, evaluations: count.get() })
}

/// Bracketed root of `theta(gain) = target` (theta is non-decreasing in the
/// gain).
fn fit_gain(ev: &Evaluator, key: ConfigKey, p: f64, target: f64, model: &SegmentModel) -> Result<f64, MechanicsError> {
    if !(target > 0.0 && target < 180.0) {
        return Err(MechanicsError::InvalidModel(format!("angle anchor must be in (0, 180) degrees (got {target})")));
    }
    let at = |g: f64| ev.theta(key, p, &SegmentModel { drive_gain: g, ..model.clone() });
    let (mut lo, mut hi) = (model.drive_gain, model.drive_gain);
    while at(lo)? > target {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(MechanicsError::NonConvergence { evaluations: ev.count.get() });
        }
    }
    while at(hi)? < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(MechanicsError::NonConvergence { evaluations: ev.count.get() });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let t = at(mid)?;
        if (t - target).abs() < 1e-10 || hi - lo <= 1e-15 * hi {
            return Ok(mid);
        }
        if t < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Kendall rank correlation with the tau-b tie correction.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rank correlation needs paired samples");
    let n = a.len();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            match (da == 0.0, db == 0.0) {
                (true, true) => {}
                (true, false) => ties_a += 1,
                (false, true) => ties_b += 1,
                _ => {
                    if (da > 0.0) == (db > 0.0) {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
    }
    let n1 = (concordant + discordant + ties_a) as f64;
    let n2 = (concordant + discordant + ties_b) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / (n1 * n2).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub config: String,
    pub pressure_kpa: f64,
    pub reference_deg: f64,
    pub predicted_deg: f64,
    /// Pressure actually reached when the ramp stopped early.
    pub reached_kpa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub rows: Vec<RankingRow>,
    pub tau: f64,
}

/// Predicted angle at the end of a 1 kPa ramp to `p_target`, stopping at
/// the last stable level. Returns `(theta, pressure reached)`.
pub fn ramp_theta(prepared: &Prepared, p_target: f64, seg: &SegmentModel) -> Result<(f64, f64), MechanicsError> {
    let levels = PressureSchedule::Explicit {
        points: (0..=p_target.ceil() as usize).map(|i| (i as f64, (i as f64).min(p_target))).collect(),
    }
    .monotone_legs()?;
    match prepared.run(&levels, seg) {
        Ok(r) => Ok((*r.theta.last().unwrap_or(&0.0), *r.pressures.last().unwrap_or(&0.0))),
        Err(MechanicsError::Instability { partial, .. }) => {
            Ok((*partial.theta.last().unwrap_or(&0.0), *partial.pressures.last().unwrap_or(&0.0)))
        }
        Err(e) => Err(e),
    }
}

/// Compares predictions with the reference angles, skipping the labels in
/// `exclude`.
pub fn ranking(
    spec: &ActuatorSpec,
    materials: &MaterialLibrary,
    seg: &SegmentModel,
    exclude: &[&str],
) -> Result<RankingReport, MechanicsError> {
    let mut rows = Vec::new();
    for (key, p, reference) in REFERENCE_ANGLES {
        let label = key.label();
        if exclude.contains(&label.as_str()) {
            continue;
        }
        let prep = Prepared::new(spec, &[key.winding(spec)], materials, seg)?;
        let (predicted, reached) = ramp_theta(&prep, p, seg)?;
        rows.push(RankingRow {
            config: label,
            pressure_kpa: p,
            reference_deg: reference,
            predicted_deg: predicted,
            reached_kpa: reached,
        });
    }
    let pred: Vec<f64> = rows.iter().map(|r| r.predicted_deg).collect();
    let refs: Vec<f64> = rows.iter().map(|r| r.reference_deg).collect();
    Ok(RankingReport { tau: kendall_tau_b(&pred, &refs), rows })
}
