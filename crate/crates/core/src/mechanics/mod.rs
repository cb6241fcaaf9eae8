//! Reduced-order quasi-static bending model.
//!
//! The chamber length is split into pieces, each with a constant curvature
//! found from a moment balance on a strip model of its cross-section. The
//! driving moment is the chamber pressure force acting at the chamber
//! centroid, offset `d` from the inextensible layer, scaled by a fibre
//! effectiveness `eta(n) = 1 - exp(-n / n0)` and a gain. Radial expansion
//! comes from a thin-wall hoop balance with fibre stiffening, and twist from
//! the helix tilt of unbalanced windings.
//!
//! This is a calibrated surrogate for a full 3D finite element analysis.
//! Absolute angles are only as good as the anchors used to fit
//! [`SegmentModel`].

pub mod calibrate;
pub mod device;
pub mod section;
pub mod solver;
pub mod workspace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiberpath::{winding_surface, FiberError, HelixStyle, WindingSpec, WindingSurface};
use crate::geometry::{ActuatorSpec, GeometryError};
use crate::materials::{MaterialError, MaterialLibrary, ECOFLEX_00_50, KEVLAR};
use crate::postprocess::{PostprocessError, PressureSchedule};

pub use calibrate::{calibrate, kendall_tau_b, Anchor, CalibrationReport, ConfigKey};
pub use device::compose_device;
pub use section::{build_section, Section};
pub use workspace::{workspace, Corridor, WorkspaceReport};

#[derive(Debug, Error)]
pub enum MechanicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Schedule(#[from] PostprocessError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(
        "geometric instability at {pressure_kpa} kPa: expansion {expansion_mm:.3} mm exceeds \
         {limit_mm:.3} mm (critical pressure {critical_kpa:.1} kPa)"
    )]
    Instability { pressure_kpa: f64, critical_kpa: f64, expansion_mm: f64, limit_mm: f64, partial: Box<SolveResult> },
    #[error("equilibrium not found at {pressure_kpa} kPa: {detail}")]
    Bracket { pressure_kpa: f64, detail: String },
    #[error("calibration did not converge within {evaluations} evaluations")]
    NonConvergence { evaluations: usize },
    #[error("device does not fit: {0}")]
    DeviceMismatch(String),
}

/// Model constants. The defaults are the result of [`calibrate`] against
/// the default anchors (30 SH at 100 kPa giving 90 degrees, 100 SH twisting
/// 2.06 % at 100 kPa, 18 SH expanding 2.6 mm at 93 kPa).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentModel {
    pub n_segments: usize,
    /// Strips in the cross-section quadrature.
    pub strips: usize,
    /// Turn count scale of the fibre effectiveness.
    pub n0: f64,
    pub drive_gain: f64,
    pub k_twist: f64,
    pub expansion_scale: f64,
    /// Expansion, as a fraction of chamber radius, at which the actuator is
    /// reported unstable.
    pub instability_fraction: f64,
    /// Actuator body material.
    pub silicone: String,
}

impl Default for SegmentModel {
    fn default() -> Self {
        Self {
            n_segments: 8,
            strips: 1200,
            n0: 60.0,
            drive_gain: DEFAULT_DRIVE_GAIN,
            k_twist: DEFAULT_K_TWIST,
            expansion_scale: DEFAULT_EXPANSION_SCALE,
            instability_fraction: 0.35,
            silicone: ECOFLEX_00_50.into(),
        }
    }
}

pub const DEFAULT_DRIVE_GAIN: f64 = 5.463_337_473_810_284_5;
pub const DEFAULT_K_TWIST: f64 = 16.537_285_441_293_25;
pub const DEFAULT_EXPANSION_SCALE: f64 = 516.817_976_877_709_7;

impl SegmentModel {
    pub fn validate(&self) -> Result<(), MechanicsError> {
        let bad = |m: String| Err(MechanicsError::InvalidModel(m));
        if self.n_segments < 4 {
            return bad(format!("n_segments must be at least 4 (got {})", self.n_segments));
        }
        for (name, v) in [
            ("n0", self.n0),
            ("drive_gain", self.drive_gain),
            ("expansion_scale", self.expansion_scale),
            ("instability_fraction", self.instability_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive (got {v})"));
            }
        }
        if !(self.k_twist >= 0.0 && self.k_twist.is_finite()) {
            return bad(format!("k_twist must be non-negative (got {})", self.k_twist));
        }
        Ok(())
    }

    /// Fibre effectiveness for an effective turn count.
    pub fn eta(&self, n_eff: f64) -> f64 {
        1.0 - (-n_eff / self.n0).exp()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub pressures: Vec<f64>,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub radial_expansion: Vec<f64>,
    pub twist_pct: Vec<f64>,
    pub tip_xyz: Vec<[f64; 3]>,
    /// Length-weighted mean curvature, 1/mm.
    pub curvature: Vec<f64>,
    /// Largest relative balance residual over the pieces.
    pub residual: Vec<f64>,
}

impl SolveResult {
    pub fn len(&self) -> usize {
        self.pressures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pressures.is_empty()
    }

    fn push(&mut self, s: &PointState) {
        self.pressures.push(s.pressure_kpa);
        self.theta.push(s.theta_deg);
        self.alpha.push(2.0 * s.theta_deg);
        self.radial_expansion.push(s.expansion_mm);
        self.twist_pct.push(s.twist_pct);
        self.tip_xyz.push(s.pose.tip);
        self.curvature.push(s.mean_kappa);
        self.residual.push(s.residual);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("pressure_kPa,theta_deg,alpha_deg,expansion_mm,twist_pct,tip_x,tip_y,tip_z\n");
        for i in 0..self.len() {
            let t = self.tip_xyz[i];
            s.push_str(&format!(
                "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                self.pressures[i],
                self.theta[i],
                self.alpha[i],
                self.radial_expansion[i],
                self.twist_pct[i],
                t[0],
                t[1],
                t[2]
            ));
        }
        s
    }
}

/// Tip pose of a chain of constant-curvature pieces followed by a rigid
/// extension. Coordinates: `x` in the bending direction, `y` out of plane,
/// `z` along the undeformed axis from the chamber base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub arc_end: [f64; 3],
    pub tip: [f64; 3],
    /// Heading of the final tangent from the z axis, radians.
    pub heading: f64,
}

pub fn chain_pose(pieces: &[(f64, f64)], extension: f64, twist: f64) -> Pose {
    let (mut x, mut z, mut phi) = (0.0f64, 0.0f64, 0.0f64);
    for &(kappa, len) in pieces {
        let turn = kappa * len;
        if turn.abs() < 1e-12 {
            x += phi.sin() * len;
            z += phi.cos() * len;
        } else {
            x += (phi.cos() - (phi + turn).cos()) / kappa;
            z += ((phi + turn).sin() - phi.sin()) / kappa;
        }
        phi += turn;
    }
    let arc = [x, 0.0, z];
    let tx = x + extension * phi.sin();
    let tz = z + extension * phi.cos();
    let rot = |p: [f64; 3]| [p[0] * twist.cos(), p[0] * twist.sin(), p[2]];
    Pose { arc_end: rot(arc), tip: rot([tx, 0.0, tz]), heading: phi }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PointState {
    pub pressure_kpa: f64,
    pub theta_deg: f64,
    pub expansion_mm: f64,
    pub twist_pct: f64,
    pub pose: Pose,
    pub mean_kappa: f64,
    pub residual: f64,
}

/// Expansion model inputs for one chamber.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HoopChamber {
    radius: f64,
    /// `r^2 / (t E_sil + E_f A_f n chi)`, mm per MPa before scaling.
    compliance: f64,
}

/// Everything about a configuration that does not depend on pressure or on
/// the calibration constants.
#[derive(Debug, Clone)]
pub struct Prepared {
    sections: Vec<Section>,
    /// `(section index, length)` per axial piece.
    pieces: Vec<(usize, f64)>,
    chamber_area: f64,
    drive_offset: f64,
    layered: bool,
    n_eff: f64,
    twist_angle: f64,
    hoop: Vec<HoopChamber>,
    extension: f64,
    straight_length: f64,
}

fn helix_tilt(surface: &WindingSurface, w: &WindingSpec) -> f64 {
    match w.style {
        HelixStyle::Dh => 0.0,
        HelixStyle::Sh => w.chirality.sign() * (w.pitch() / surface.perimeter()).atan(),
    }
}

impl Prepared {
    pub fn new(
        spec: &ActuatorSpec,
        windings: &[WindingSpec],
        materials: &MaterialLibrary,
        seg: &SegmentModel,
    ) -> Result<Self, MechanicsError> {
        seg.validate()?;
        if windings.is_empty() {
            return Err(MechanicsError::InvalidModel("at least one winding is required".into()));
        }
        let mut surfaces = Vec::with_capacity(windings.len());
        for w in windings {
            w.validate()?;
            surfaces.push(winding_surface(spec, w)?);
        }
        let l = spec.chamber_length;

        // axial pieces, split exactly at the payload ends
        let payload_span = spec.device.as_ref().and_then(|d| {
            d.device
                .embedded_payload
                .as_ref()
                .filter(|_| d.payload_active)
                .map(|p| (p.axial_start, p.axial_start + p.length))
        });
        let mut cuts: Vec<f64> = (0..=seg.n_segments).map(|i| l * i as f64 / seg.n_segments as f64).collect();
        if let Some((a, b)) = payload_span {
            cuts.extend([a, b].into_iter().filter(|&c| c > 0.0 && c < l));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let plain = build_section(spec, materials, &seg.silicone, seg.strips, false)?;
        let mut sections = vec![plain];
        let mut pieces = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let idx = match payload_span {
                Some((a, b)) if mid > a && mid < b => {
                    if sections.len() == 1 {
                        sections.push(build_section(spec, materials, &seg.silicone, seg.strips, true)?);
                    }
                    1
                }
                _ => 0,
            };
            pieces.push((idx, w[1] - w[0]));
        }

        let (chamber_area, centroid_y) = section::chamber_area_centroid(spec);
        let layered = sections[0].layered;
        let drive_offset = centroid_y - sections[0].y_ref;
        if layered && drive_offset <= 0.0 {
            return Err(MechanicsError::InvalidModel(format!(
                "chamber centroid lies {drive_offset:.4} mm from the neutral layer; it must be above it"
            )));
        }

        let n_eff = windings.iter().map(|w| w.style.passes() * w.turns as f64).sum::<f64>() / windings.len() as f64;
        let twist_angle =
            surfaces.iter().zip(windings).map(|(s, w)| helix_tilt(s, w)).sum::<f64>() / windings.len() as f64;

        let e_sil = materials.model(&seg.silicone)?.small_strain_modulus();
        let kevlar = materials.entry(KEVLAR)?;
        let e_f = kevlar.model.small_strain_modulus();
        let radius_scale =
            if windings.iter().any(|w| w.halved_fibre_radius) && !kevlar.halved_radius { 0.5 } else { 1.0 };
        let r_f = materials.fibre_radius()? * radius_scale;
        let area_f = std::f64::consts::PI * r_f * r_f;
        let extra_wall =
            spec.device.as_ref().map_or(0.0, |d| (0.5 * d.device.body_diameter - spec.outer_radius).max(0.0));
        let mut hoop = Vec::with_capacity(windings.len());
        for w in windings {
            let chamber = &spec.chambers[w.chamber];
            let r = chamber.radius();
            let t = chamber.crown_wall + extra_wall;
            let fibre = e_f * area_f * w.turn_density() * w.style.passes();
            hoop.push(HoopChamber { radius: r, compliance: r * r / (t * e_sil + fibre) });
        }

        Ok(Self {
            sections,
            pieces,
            chamber_area,
            drive_offset,
            layered,
            n_eff,
            twist_angle,
            hoop,
            extension: spec.rigid_extension(),
            straight_length: l + spec.rigid_extension(),
        })
    }

    pub fn effective_turns(&self) -> f64 {
        self.n_eff
    }

    pub fn drive_offset(&self) -> f64 {
        self.drive_offset
    }

    pub fn twist_angle(&self) -> f64 {
        self.twist_angle
    }

    /// Mean radial expansion at `p_kpa`.
    pub fn expansion(&self, p_kpa: f64, seg: &SegmentModel) -> f64 {
        let p = p_kpa / 1000.0;
        self.hoop.iter().map(|h| seg.expansion_scale * p * h.compliance).sum::<f64>() / self.hoop.len() as f64
    }

    /// Lowest pressure at which any chamber exceeds the instability limit.
    pub fn critical_pressure(&self, seg: &SegmentModel) -> f64 {
        self.hoop
            .iter()
            .map(|h| 1000.0 * seg.instability_fraction * h.radius / (seg.expansion_scale * h.compliance))
            .fold(f64::INFINITY, f64::min)
    }

    fn instability_limit(&self, seg: &SegmentModel) -> f64 {
        self.hoop.iter().map(|h| h.radius).fold(f64::INFINITY, f64::min) * seg.instability_fraction
    }

    /// Equilibrium at one pressure, without the instability check.
    pub(crate) fn point(&self, p_kpa: f64, seg: &SegmentModel) -> Result<PointState, MechanicsError> {
        if !(p_kpa >= 0.0 && p_kpa.is_finite()) {
            return Err(MechanicsError::InvalidModel(format!("pressure must be non-negative (got {p_kpa})")));
        }
        let p = p_kpa / 1000.0;
        let force = seg.drive_gain * p * self.chamber_area * seg.eta(self.n_eff);
        let mut kappas = Vec::with_capacity(self.sections.len());
        let mut residual: f64 = 0.0;
        for s in &self.sections {
            let eq = if self.layered {
                solver::solve_layered(s, force * self.drive_offset)
            } else {
                solver::solve_free(s, force)
            }
            .map_err(|detail| MechanicsError::Bracket { pressure_kpa: p_kpa, detail })?;
            residual = residual.max(eq.relative_residual);
            kappas.push(eq.kappa);
        }
        let mut chain: Vec<(f64, f64)> = self.pieces.iter().map(|&(i, len)| (kappas[i], len)).collect();
        let total_turn: f64 = chain.iter().map(|(k, len)| k * len).sum();
        let length: f64 = chain.iter().map(|(_, len)| len).sum();
        let theta_deg = (0.5 * total_turn.abs()).to_degrees().min(180.0);
        let full = 2.0 * std::f64::consts::PI;
        if total_turn.abs() > full {
            let scale = full / total_turn.abs();
            chain.iter_mut().for_each(|(k, _)| *k *= scale);
        }
        let pose = chain_pose(&chain, self.extension, self.twist_angle);
        let twist_pct = if p_kpa == 0.0 || self.twist_angle == 0.0 {
            0.0
        } else {
            let d = [pose.tip[0], pose.tip[1], pose.tip[2] - self.straight_length];
            let disp = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if disp == 0.0 {
                0.0
            } else {
                seg.k_twist * 100.0 * pose.tip[1].abs() / disp
            }
        };
        Ok(PointState {
            pressure_kpa: p_kpa,
            theta_deg,
            expansion_mm: self.expansion(p_kpa, seg),
            twist_pct,
            pose,
            mean_kappa: total_turn / length,
            residual,
        })
    }

    /// Runs a pressure sequence with the instability check.
    pub fn run(&self, pressures: &[f64], seg: &SegmentModel) -> Result<SolveResult, MechanicsError> {
        let limit = self.instability_limit(seg);
        let mut out = SolveResult::default();
        for &p in pressures {
            let st = self.point(p, seg)?;
            if st.expansion_mm > limit {
                return Err(MechanicsError::Instability {
                    pressure_kpa: p,
                    critical_kpa: self.critical_pressure(seg),
                    expansion_mm: st.expansion_mm,
                    limit_mm: limit,
                    partial: Box::new(out),
                });
            }
            out.push(&st);
        }
        Ok(out)
    }
}

/// Quasi-static response over a pressure schedule. `windings` holds one
/// winding per wound chamber.
pub fn solve_quasi_static(
    spec: &ActuatorSpec,
    windings: &[WindingSpec],
    materials: &MaterialLibrary,
    schedule: &PressureSchedule,
    seg: &SegmentModel,
) -> Result<SolveResult, MechanicsError> {
    let pressures = schedule.monotone_legs()?;
    Prepared::new(spec, windings, materials, seg)?.run(&pressures, seg)
}

/// Mean radial expansion at one pressure.
pub fn radial_expansion_model(
    spec: &ActuatorSpec,
    windings: &[WindingSpec],
    materials: &MaterialLibrary,
    seg: &SegmentModel,
    p_kpa: f64,
) -> Result<f64, MechanicsError> {
    if !(p_kpa >= 0.0) {
        return Err(MechanicsError::InvalidModel(format!("pressure must be non-negative (got {p_kpa})")));
    }
    Ok(Prepared::new(spec, windings, materials, seg)?.expansion(p_kpa, seg))
}

/// Twist percentage per pressure: `k_twist * 100 * |tip_y| / |tip - tip0|`.
/// Exactly zero when the windings' helix tilts cancel (double helix, or a
/// mirrored pair).
pub fn twist_estimate(
    spec: &ActuatorSpec,
    windings: &[WindingSpec],
    solve: &SolveResult,
    seg: &SegmentModel,
) -> Result<Vec<f64>, MechanicsError> {
    let mut tilt = 0.0;
    for w in windings {
        tilt += helix_tilt(&winding_surface(spec, w)?, w);
    }
    let straight = spec.chamber_length + spec.rigid_extension();
    Ok(solve
        .tip_xyz
        .iter()
        .map(|t| {
            let d = [t[0], t[1], t[2] - straight];
            let disp = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if tilt == 0.0 || disp == 0.0 {
                0.0
            } else {
                seg.k_twist * 100.0 * t[1].abs() / disp
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry_a, build_geometry_b, GeometryAParams, GeometryBParams};

    fn spec_a() -> ActuatorSpec {
        build_geometry_a(&GeometryAParams::default()).unwrap()
    }

    fn ramp(p_max: f64) -> PressureSchedule {
        PressureSchedule::Proportional { t_end: 1.0, p_max, samples: 11 }
    }

    #[test]
    fn unloaded_reference() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 100);
        let r =
            solve_quasi_static(&spec, &[w], &MaterialLibrary::default(), &ramp(0.0), &SegmentModel::default()).unwrap();
        for i in 0..r.len() {
            assert_eq!(r.theta[i], 0.0);
            assert_eq!(r.radial_expansion[i], 0.0);
            assert_eq!(r.twist_pct[i], 0.0);
            assert_eq!(r.tip_xyz[i], [0.0, 0.0, 37.5]);
        }
    }

    #[test]
    fn theta_monotone_and_alpha_doubles() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Dh, 50);
        let r = solve_quasi_static(&spec, &[w], &MaterialLibrary::default(), &ramp(100.0), &SegmentModel::default())
            .unwrap();
        assert!(r.theta.windows(2).all(|t| t[1] >= t[0]));
        for i in 0..r.len() {
            assert_eq!(r.alpha[i], 2.0 * r.theta[i]);
            assert!((0.0..=180.0).contains(&r.theta[i]));
            assert!(r.residual[i] < 1e-10);
        }
    }

    #[test]
    fn double_helix_bends_at_least_as_far() {
        let spec = spec_a();
        let seg = SegmentModel::default();
        let lib = MaterialLibrary::default();
        let theta = |style, n| {
            let w = WindingSpec::for_spec(&spec, style, n);
            *solve_quasi_static(&spec, &[w], &lib, &ramp(100.0), &seg).unwrap().theta.last().unwrap()
        };
        for n in [30, 100] {
            assert!(theta(HelixStyle::Dh, n) >= theta(HelixStyle::Sh, n));
        }
    }

    #[test]
    fn chain_pose_matches_arc_chord() {
        let l = 26.5;
        for alpha in [0.3f64, 1.0, std::f64::consts::PI, 5.0] {
            let k = alpha / l;
            let pieces: Vec<(f64, f64)> = (0..8).map(|_| (k, l / 8.0)).collect();
            let pose = chain_pose(&pieces, 11.0, 0.0);
            let a = pose.arc_end;
            let chord = (a[0] * a[0] + a[2] * a[2]).sqrt();
            let exact = 2.0 / k * (0.5 * k * l).sin();
            assert!((chord - exact).abs() <= 1e-9 * exact);
            let ext = ((pose.tip[0] - a[0]).powi(2) + (pose.tip[2] - a[2]).powi(2)).sqrt();
            assert!((ext - 11.0).abs() < 1e-9);
            assert!((pose.heading - alpha).abs() < 1e-12);
        }
        let straight = chain_pose(&[(0.0, 26.5)], 11.0, 0.3);
        assert_eq!(straight.tip, [0.0, 0.0, 37.5]);
    }

    #[test]
    fn segment_refinement_is_harmless() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 30);
        let mats = MaterialLibrary::default();
        let coarse = SegmentModel::default();
        let fine = SegmentModel { n_segments: 16, ..SegmentModel::default() };
        let a = Prepared::new(&spec, std::slice::from_ref(&w), &mats, &coarse).unwrap().point(100.0, &coarse).unwrap();
        let b = Prepared::new(&spec, &[w], &mats, &fine).unwrap().point(100.0, &fine).unwrap();
        assert!((a.theta_deg - b.theta_deg).abs() <= 0.005 * a.theta_deg);
    }

    #[test]
    fn expansion_decreases_with_turns() {
        let spec = spec_a();
        let mats = MaterialLibrary::default();
        let seg = SegmentModel::default();
        let mut last = f64::INFINITY;
        for turns in [9, 18, 30, 50, 100, 400] {
            let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, turns);
            let u = radial_expansion_model(&spec, &[w], &mats, &seg, 100.0).unwrap();
            assert!(u < last);
            last = u;
        }
    }

    #[test]
    fn low_turn_instability_carries_partial_result() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 9);
        let err = solve_quasi_static(&spec, &[w], &MaterialLibrary::default(), &ramp(100.0), &SegmentModel::default())
            .unwrap_err();
        match err {
            MechanicsError::Instability { critical_kpa, partial, .. } => {
                assert!(critical_kpa < 100.0);
                assert!(!partial.is_empty());
                assert!(partial.pressures.iter().all(|&p| p <= critical_kpa));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn double_helix_and_mirrored_pair_do_not_twist() {
        let spec = spec_a();
        let mats = MaterialLibrary::default();
        let seg = SegmentModel::default();
        let dh = WindingSpec::for_spec(&spec, HelixStyle::Dh, 30);
        let r = solve_quasi_static(&spec, std::slice::from_ref(&dh), &mats, &ramp(100.0), &seg).unwrap();
        assert!(r.twist_pct.iter().all(|&t| t == 0.0));
        assert_eq!(twist_estimate(&spec, &[dh], &r, &seg).unwrap(), r.twist_pct);

        let b = build_geometry_b(&GeometryBParams::default()).unwrap();
        let w0 = WindingSpec::for_spec(&b, HelixStyle::Sh, 100).on_chamber(&b, 0);
        let w1 = WindingSpec::for_spec(&b, HelixStyle::Sh, 100).on_chamber(&b, 1);
        let r = solve_quasi_static(&b, &[w0, w1], &mats, &ramp(100.0), &seg).unwrap();
        assert!(r.twist_pct.iter().all(|&t| t == 0.0));
        assert!(r.radial_expansion.iter().all(|&u| u < 1.0));
    }

    #[test]
    fn single_helix_twists() {
        let spec = spec_a();
        let seg = SegmentModel::default();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 100);
        let r = solve_quasi_static(&spec, std::slice::from_ref(&w), &MaterialLibrary::default(), &ramp(100.0), &seg)
            .unwrap();
        assert!(*r.twist_pct.last().unwrap() > 0.0);
        let again = twist_estimate(&spec, &[w], &r, &seg).unwrap();
        for (a, b) in again.iter().zip(&r.twist_pct) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn geometry_b_with_layer_bends_more_than_without() {
        let mats = MaterialLibrary::default();
        let seg = SegmentModel::default();
        let free = build_geometry_b(&GeometryBParams::default()).unwrap();
        let layered = build_geometry_b(&GeometryBParams { inextensible_layer: true, ..Default::default() }).unwrap();
        let theta = |s: &ActuatorSpec| {
            let ws: Vec<WindingSpec> =
                (0..2).map(|c| WindingSpec::for_spec(s, HelixStyle::Sh, 100).on_chamber(s, c)).collect();
            Prepared::new(s, &ws, &mats, &seg).unwrap().point(100.0, &seg).unwrap().theta_deg
        };
        assert!(theta(&layered) > theta(&free));
    }
}
