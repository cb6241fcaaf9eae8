//! Parametric actuator cross-sections.
//!
//! Coordinates: `x` is lateral, `y` points from the flat (inextensible) side
//! towards the curved crown and is measured from the datum origin at the
//! centre of the outer circle, `z` runs along the chamber from its base.
//! Everything is in millimetres.
//!
//! Geometry A is a single chamber: a circular arc of diameter `D_i` closed by
//! a flat floor, with the two sharp arc/floor corners rounded by tangent
//! fillets of equal radius. The floor sits `delta_r + delta_a + delta_f`
//! above the datum (flat surface, fabric layer, silicone cover). When the
//! fillet radius is not given it is solved so the chamber area matches a
//! target, 20.8 mm² by default.
//!
//! Geometry B has two parallel cylindrical chambers inside the same outer
//! envelope.

pub mod polygon;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use polygon::Point2;

pub const SCHEMA_VERSION: u32 = 1;

/// Samples used for each chamber's wall-thickness profile.
const WALL_PROFILE_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{name} must be strictly positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("chamber exceeds the outer envelope: {0}")]
    ChamberExceedsEnvelope(String),
    #[error("{name} = {value} mm is below the hard floor of {floor} mm")]
    CoverBelowFloor { name: &'static str, value: f64, floor: f64 },
    #[error("fillet cannot be constructed: {0}")]
    FilletInfeasible(String),
    #[error("chambers overlap: separation {separation} mm <= diameter {diameter} mm")]
    ChambersOverlap { separation: f64, diameter: f64 },
    #[error("{location} wall is {wall:.4} mm, below the minimum of {min_wall} mm")]
    WallBelowFloor { location: &'static str, wall: f64, min_wall: f64 },
    #[error("boundary of {0} is degenerate (self-intersecting or too few vertices)")]
    DegenerateBoundary(String),
    #[error("device does not fit: {0}")]
    DeviceMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Chirality {
    Cw,
    Ccw,
}

impl Chirality {
    pub fn flipped(self) -> Self {
        match self {
            Chirality::Cw => Chirality::Ccw,
            Chirality::Ccw => Chirality::Cw,
        }
    }

    /// +1 for counter-clockwise (viewed from the base looking along +z).
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Cw => -1.0,
            Chirality::Ccw => 1.0,
        }
    }
}

impl std::fmt::Display for Chirality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Chirality::Cw => "CW",
            Chirality::Ccw => "CCW",
        })
    }
}

impl std::str::FromStr for Chirality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CW" => Ok(Chirality::Cw),
            "CCW" => Ok(Chirality::Ccw),
            other => Err(format!("unknown chirality '{other}' (expected CW or CCW)")),
        }
    }
}

/// How the Geometry A corner fillets are sized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum FilletSpec {
    /// Explicit radius in mm. Zero gives sharp corners.
    Radius(f64),
    /// Solve the radius so the chamber area equals this many mm².
    MatchArea(f64),
}

/// Geometry A parameters. Field names follow the usual symbol table for
/// this actuator (`d_i` = D_i, `delta_f` = δ_f and so on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryAParams {
    /// Internal air chamber diameter.
    pub d_i: f64,
    /// Outer geometry diameter.
    pub d_o: f64,
    /// Silicone cover at the flat interface.
    pub delta_f: f64,
    /// Silicone cover at the curved side.
    pub delta_c: f64,
    /// Silicone between fibre and chamber.
    pub delta_t: f64,
    /// Offset from the flat surface to the datum origin.
    pub delta_r: f64,
    /// Fibreglass fabric thickness.
    pub delta_a: f64,
    /// Kevlar fibre diameter.
    pub phi_k: f64,
    /// Winding rod diameter.
    pub d_rod: f64,
    /// Maximum actuator width.
    pub w: f64,
    /// Air chamber length.
    pub l: f64,
    /// Cap length.
    pub c: f64,
    /// Length of the spherical cap segment.
    pub r: f64,
    /// Total actuator thickness.
    pub t: f64,
    pub fillet: FilletSpec,
    /// `delta_c`/`delta_t` below their nominal values only warn; below this
    /// floor they are rejected.
    pub cover_floor: f64,
    /// Polygon vertices per chamber boundary (at least 512).
    pub samples: usize,
}

impl Default for GeometryAParams {
    fn default() -> Self {
        Self {
            d_i: 14.0,
            d_o: 18.0,
            delta_f: 1.6,
            delta_c: 0.2,
            delta_t: 0.3,
            delta_r: 2.0,
            delta_a: 0.2,
            phi_k: 0.206,
            d_rod: 5.0,
            w: 18.0,
            l: 26.5,
            c: 4.0,
            r: 7.0,
            t: 7.0,
            fillet: FilletSpec::MatchArea(20.8),
            cover_floor: 0.1,
            samples: 1024,
        }
    }
}

impl GeometryAParams {
    pub fn total_length(&self) -> f64 {
        self.l + self.r + self.c
    }

    /// Height of the chamber floor above the datum origin.
    pub fn floor_y(&self) -> f64 {
        self.delta_r + self.delta_a + self.delta_f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryBParams {
    pub chamber_diameter: f64,
    /// Centre-to-centre distance between the two chambers.
    pub chamber_separation: f64,
    /// Height of the chamber centres above the datum origin.
    pub chamber_height: f64,
    pub min_wall: f64,
    pub d_o: f64,
    pub delta_r: f64,
    pub l: f64,
    pub c: f64,
    pub r: f64,
    pub phi_k: f64,
    /// Optional fibreglass layer on the flat side.
    pub inextensible_layer: bool,
    pub delta_a: f64,
    /// Winding chirality of the left (x < 0) and right chamber.
    pub chirality: [Chirality; 2],
    pub samples: usize,
}

impl Default for GeometryBParams {
    fn default() -> Self {
        Self {
            chamber_diameter: 4.0,
            chamber_separation: 7.0,
            chamber_height: 5.0,
            min_wall: 0.5,
            d_o: 18.0,
            delta_r: 2.0,
            l: 26.5,
            c: 4.0,
            r: 7.0,
            phi_k: 0.206,
            inextensible_layer: false,
            delta_a: 0.2,
            chirality: [Chirality::Cw, Chirality::Ccw],
            samples: 1024,
        }
    }
}

impl GeometryBParams {
    pub fn total_length(&self) -> f64 {
        self.l + self.r + self.c
    }
}

/// Rigid inclusion embedded in a device body (a camera, for instance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub diameter: f64,
    pub length: f64,
    /// Cross-section position of the inclusion axis.
    pub centre: Point2,
    /// Axial start measured from the chamber base.
    pub axial_start: f64,
    pub material: String,
}

impl Default for Payload {
    fn default() -> Self {
        Self { diameter: 6.0, length: 12.0, centre: [0.0, -4.5], axial_start: 16.5, material: "clear_v4".into() }
    }
}

/// Cylindrical device body that an actuator is cast into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub body_diameter: f64,
    pub body_length: f64,
    pub actuator_section_length: f64,
    /// Whether the body fills the region beyond the actuator's flat side.
    pub fill_flat_side: bool,
    pub body_material: String,
    pub embedded_payload: Option<Payload>,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        Self {
            body_diameter: 18.0,
            body_length: 60.5,
            actuator_section_length: 37.5,
            fill_flat_side: true,
            body_material: "ecoflex_00_50".into(),
            embedded_payload: Some(Payload::default()),
        }
    }
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        positive("body_diameter", self.body_diameter)?;
        positive("body_length", self.body_length)?;
        positive("actuator_section_length", self.actuator_section_length)?;
        if self.actuator_section_length > self.body_length {
            return Err(GeometryError::DeviceMismatch(format!(
                "actuator section {} mm is longer than the body {} mm",
                self.actuator_section_length, self.body_length
            )));
        }
        if let Some(p) = &self.embedded_payload {
            positive("payload diameter", p.diameter)?;
            positive("payload length", p.length)?;
            let reach = p.centre[0].hypot(p.centre[1]) + 0.5 * p.diameter;
            if reach > 0.5 * self.body_diameter {
                return Err(GeometryError::DeviceMismatch(format!(
                    "payload reaches {reach:.3} mm from the axis, body radius is {}",
                    0.5 * self.body_diameter
                )));
            }
            if p.axial_start < 0.0 || p.axial_start + p.length > self.body_length {
                return Err(GeometryError::DeviceMismatch("payload extends beyond the body length".into()));
            }
        }
        Ok(())
    }
}

/// Device composition attached to a spec by `mechanics::compose_device`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceComposition {
    pub device: DeviceSpec,
    pub payload_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum GeometryKind {
    A(GeometryAParams),
    B(GeometryBParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChamberShape {
    /// Arc about the datum origin closed by a floor, corners filleted.
    FilletedSegment {
        radius: f64,
        floor_y: f64,
        fillet: f64,
    },
    Circle {
        centre: Point2,
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chamber {
    pub shape: ChamberShape,
    pub boundary: Vec<Point2>,
    pub chirality: Option<Chirality>,
    /// Silicone between the chamber and the curved outer surface, measured
    /// radially from the datum origin.
    pub crown_wall: f64,
}

impl Chamber {
    pub fn radius(&self) -> f64 {
        match self.shape {
            ChamberShape::FilletedSegment { radius, .. } => radius,
            ChamberShape::Circle { radius, .. } => radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub y_bottom: f64,
    pub thickness: f64,
}

impl Layer {
    /// Plane held at zero axial strain.
    pub fn neutral_y(&self) -> f64 {
        self.y_bottom + 0.5 * self.thickness
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSample {
    pub chamber: usize,
    pub point: Point2,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberMetrics {
    /// Total over all chambers, mm².
    pub cross_section_area: f64,
    pub chamber_areas: Vec<f64>,
    /// mm³.
    pub nominal_volume: f64,
    pub wall_thickness_profile: Vec<WallSample>,
    pub min_wall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub schema_version: u32,
    pub geometry: GeometryKind,
    pub outer_radius: f64,
    /// Height of the flat outer surface above the datum origin.
    pub flat_y: f64,
    pub outer_boundary: Vec<Point2>,
    pub chambers: Vec<Chamber>,
    pub inextensible_layer: Option<Layer>,
    pub chamber_length: f64,
    pub cap_length: f64,
    pub cap_segment: f64,
    pub total_length: f64,
    pub fibre_diameter: f64,
    /// Silicone between chamber wall and fibre.
    pub fibre_wall: f64,
    pub device: Option<DeviceComposition>,
    pub metrics: ChamberMetrics,
    pub warnings: Vec<String>,
}

impl ActuatorSpec {
    /// Extra rigid length beyond the bending chamber.
    pub fn rigid_extension(&self) -> f64 {
        self.cap_segment + self.cap_length
    }

    /// Default fibre centreline offset from the chamber wall.
    pub fn default_fibre_offset(&self) -> f64 {
        self.fibre_wall + 0.5 * self.fibre_diameter
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Reflection across the sagittal plane `x = 0`. Chamber order is
    /// swapped so index 0 stays the left chamber, and winding chirality
    /// flips.
    pub fn mirrored(&self) -> ActuatorSpec {
        let mut out = self.clone();
        out.outer_boundary = polygon::reflect_x(&self.outer_boundary);
        out.chambers = self
            .chambers
            .iter()
            .rev()
            .map(|c| Chamber {
                shape: match c.shape {
                    ChamberShape::Circle { centre, radius } => {
                        ChamberShape::Circle { centre: [-centre[0], centre[1]], radius }
                    }
                    s @ ChamberShape::FilletedSegment { .. } => s,
                },
                boundary: polygon::reflect_x(&c.boundary),
                chirality: c.chirality.map(Chirality::flipped),
                crown_wall: c.crown_wall,
            })
            .collect();
        if let GeometryKind::B(p) = &mut out.geometry {
            p.chirality = [p.chirality[1].flipped(), p.chirality[0].flipped()];
        }
        out.metrics = chamber_metrics(&out).expect("reflection preserves validity");
        out
    }

    /// Cross-section polylines as CSV rows `curve,index,x_mm,y_mm`.
    pub fn cross_section_csv(&self) -> String {
        let mut s = String::from("curve,index,x_mm,y_mm\n");
        for (i, p) in self.outer_boundary.iter().enumerate() {
            s.push_str(&format!("outer,{i},{},{}\n", p[0], p[1]));
        }
        for (k, c) in self.chambers.iter().enumerate() {
            for (i, p) in c.boundary.iter().enumerate() {
                s.push_str(&format!("chamber{},{i},{},{}\n", k + 1, p[0], p[1]));
            }
        }
        s
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonPositive { name, value })
    }
}

/// Builds the filleted single-chamber boundary. `fillet` may be zero.
fn filleted_segment(radius: f64, floor_y: f64, fillet: f64, samples: usize) -> Vec<Point2> {
    let r = radius;
    if fillet == 0.0 {
        let t0 = (floor_y / r).asin();
        return (0..samples)
            .map(|i| {
                let t = t0 + (PI - 2.0 * t0) * i as f64 / (samples - 1) as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
    }
    let rho = fillet;
    let cy = floor_y + rho;
    let a = ((r - rho).powi(2) - cy * cy).sqrt();
    let t0 = cy.atan2(a);
    let arc_len = r * (PI - 2.0 * t0);
    let fillet_sweep = 0.5 * PI + t0;
    let fillet_len = rho * fillet_sweep;
    let total = arc_len + 2.0 * fillet_len;
    let n_fillet = ((samples as f64 * fillet_len / total).round() as usize).max(8);
    let n_arc = samples.saturating_sub(2 * n_fillet + 1).max(16);

    let mut pts = Vec::with_capacity(n_arc + 2 * n_fillet + 1);
    for i in 0..n_arc {
        let t = t0 + (PI - 2.0 * t0) * i as f64 / n_arc as f64;
        pts.push([r * t.cos(), r * t.sin()]);
    }
    // left fillet, ending on the floor
    for i in 0..=n_fillet {
        let t = (PI - t0) + fillet_sweep * i as f64 / n_fillet as f64;
        pts.push([-a + rho * t.cos(), cy + rho * t.sin()]);
    }
    // right fillet, starting on the floor
    for i in 0..n_fillet {
        let t = -0.5 * PI + fillet_sweep * i as f64 / n_fillet as f64;
        pts.push([a + rho * t.cos(), cy + rho * t.sin()]);
    }
    pts
}

fn max_fillet(radius: f64, floor_y: f64) -> f64 {
    0.5 * (radius - floor_y)
}

fn solve_fillet(radius: f64, floor_y: f64, target: f64, samples: usize) -> Result<f64, GeometryError> {
    let area_at = |rho: f64| polygon::area(&filleted_segment(radius, floor_y, rho, samples));
    let hi_limit = max_fillet(radius, floor_y) * (1.0 - 1e-9);
    let (a_lo, a_hi) = (area_at(0.0), area_at(hi_limit));
    if !(a_hi..=a_lo).contains(&target) {
        return Err(GeometryError::FilletInfeasible(format!(
            "target area {target} mm² outside attainable range [{a_hi:.4}, {a_lo:.4}]"
        )));
    }
    let (mut lo, mut hi) = (0.0, hi_limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds Geometry A (single filleted semi-cylindrical chamber).
pub fn build_geometry_a(params: &GeometryAParams) -> Result<ActuatorSpec, GeometryError> {
    let p = params;
    for (name, v) in [
        ("D_i", p.d_i),
        ("D_O", p.d_o),
        ("delta_f", p.delta_f),
        ("delta_c", p.delta_c),
        ("delta_t", p.delta_t),
        ("delta_r", p.delta_r),
        ("delta_a", p.delta_a),
        ("phi_k", p.phi_k),
        ("D_rod", p.d_rod),
        ("W", p.w),
        ("L", p.l),
        ("C", p.c),
        ("R", p.r),
        ("T", p.t),
    ] {
        positive(name, v)?;
    }
    if p.samples < 512 {
        return Err(GeometryError::DegenerateBoundary(format!(
            "chamber sampled with {} vertices, need at least 512",
            p.samples
        )));
    }
    let outer_r = 0.5 * p.d_o;
    let chamber_r = 0.5 * p.d_i;
    if p.d_i >= p.d_o {
        return Err(GeometryError::ChamberExceedsEnvelope(format!(
            "D_i = {} mm is not smaller than D_O = {} mm",
            p.d_i, p.d_o
        )));
    }
    if p.delta_r >= outer_r {
        return Err(GeometryError::ChamberExceedsEnvelope(format!(
            "flat surface offset {} mm leaves no section inside radius {outer_r}",
            p.delta_r
        )));
    }
    let floor_y = p.floor_y();
    if floor_y >= chamber_r {
        return Err(GeometryError::ChamberExceedsEnvelope(format!(
            "chamber floor at {floor_y} mm is above the chamber crown at {chamber_r} mm"
        )));
    }
    for (name, v) in [("delta_c", p.delta_c), ("delta_t", p.delta_t)] {
        if v < p.cover_floor {
            return Err(GeometryError::CoverBelowFloor { name, value: v, floor: p.cover_floor });
        }
    }
    let crown_cover = outer_r - (chamber_r + p.delta_t + p.phi_k);
    if crown_cover < p.delta_c {
        return Err(GeometryError::WallBelowFloor {
            location: "fibre-to-crown",
            wall: crown_cover,
            min_wall: p.delta_c,
        });
    }

    let fillet = match p.fillet {
        FilletSpec::Radius(rho) => {
            let limit = max_fillet(chamber_r, floor_y);
            if !(0.0..limit).contains(&rho) {
                return Err(GeometryError::FilletInfeasible(format!("radius {rho} mm outside [0, {limit})")));
            }
            rho
        }
        FilletSpec::MatchArea(target) => {
            positive("fillet target area", target)?;
            solve_fillet(chamber_r, floor_y, target, p.samples)?
        }
    };

    let mut warnings = Vec::new();
    if p.delta_c < 0.2 {
        warnings.push(format!("delta_c = {} mm is thinner than the nominal 0.2 mm", p.delta_c));
    }
    if p.delta_t < 0.3 {
        warnings.push(format!("delta_t = {} mm is thinner than the nominal 0.3 mm", p.delta_t));
    }
    if (p.t - (outer_r - p.delta_r)).abs() > 1e-9 {
        warnings.push(format!("T = {} mm differs from D_O/2 - delta_r = {} mm", p.t, outer_r - p.delta_r));
    }

    let chamber = Chamber {
        shape: ChamberShape::FilletedSegment { radius: chamber_r, floor_y, fillet },
        boundary: filleted_segment(chamber_r, floor_y, fillet, p.samples),
        chirality: None,
        crown_wall: outer_r - chamber_r,
    };
    let mut spec = ActuatorSpec {
        schema_version: SCHEMA_VERSION,
        geometry: GeometryKind::A(p.clone()),
        outer_radius: outer_r,
        flat_y: p.delta_r,
        outer_boundary: polygon::sample_circular_segment(outer_r, p.delta_r, p.samples),
        chambers: vec![chamber],
        inextensible_layer: Some(Layer { y_bottom: p.delta_r, thickness: p.delta_a }),
        chamber_length: p.l,
        cap_length: p.c,
        cap_segment: p.r,
        total_length: p.total_length(),
        fibre_diameter: p.phi_k,
        fibre_wall: p.delta_t,
        device: None,
        metrics: empty_metrics(),
        warnings,
    };
    spec.metrics = chamber_metrics(&spec)?;
    Ok(spec)
}

/// Builds Geometry B (two cylindrical chambers, mirrored windings).
pub fn build_geometry_b(params: &GeometryBParams) -> Result<ActuatorSpec, GeometryError> {
    let p = params;
    for (name, v) in [
        ("chamber_diameter", p.chamber_diameter),
        ("chamber_height", p.chamber_height),
        ("min_wall", p.min_wall),
        ("D_O", p.d_o),
        ("delta_r", p.delta_r),
        ("L", p.l),
        ("C", p.c),
        ("R", p.r),
        ("phi_k", p.phi_k),
        ("delta_a", p.delta_a),
    ] {
        positive(name, v)?;
    }
    if p.samples < 512 {
        return Err(GeometryError::DegenerateBoundary(format!(
            "chamber sampled with {} vertices, need at least 512",
            p.samples
        )));
    }
    let outer_r = 0.5 * p.d_o;
    let rc = 0.5 * p.chamber_diameter;
    if p.chamber_separation <= p.chamber_diameter {
        return Err(GeometryError::ChambersOverlap { separation: p.chamber_separation, diameter: p.chamber_diameter });
    }
    let between = p.chamber_separation - p.chamber_diameter;
    if between < p.min_wall {
        return Err(GeometryError::WallBelowFloor { location: "inter-chamber", wall: between, min_wall: p.min_wall });
    }
    let layer_top = if p.inextensible_layer { p.delta_r + p.delta_a } else { p.delta_r };
    let floor_wall = p.chamber_height - rc - layer_top;
    if floor_wall < p.min_wall {
        return Err(GeometryError::WallBelowFloor { location: "flat-side", wall: floor_wall, min_wall: p.min_wall });
    }
    let centre_dist = (0.5 * p.chamber_separation).hypot(p.chamber_height);
    let crown_wall = outer_r - centre_dist - rc;
    if crown_wall < p.min_wall {
        return Err(GeometryError::WallBelowFloor { location: "crown", wall: crown_wall, min_wall: p.min_wall });
    }

    let half = 0.5 * p.chamber_separation;
    let chambers = [-half, half]
        .iter()
        .zip(p.chirality)
        .map(|(&x, chir)| {
            let centre = [x, p.chamber_height];
            Chamber {
                shape: ChamberShape::Circle { centre, radius: rc },
                boundary: polygon::sample_circle(centre, rc, p.samples),
                chirality: Some(chir),
                crown_wall,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if p.chirality[0] == p.chirality[1] {
        warnings.push("both chambers wound with the same chirality; twist will not cancel".into());
    }
    let mut spec = ActuatorSpec {
        schema_version: SCHEMA_VERSION,
        geometry: GeometryKind::B(p.clone()),
        outer_radius: outer_r,
        flat_y: p.delta_r,
        outer_boundary: polygon::sample_circular_segment(outer_r, p.delta_r, p.samples),
        chambers,
        inextensible_layer: p.inextensible_layer.then_some(Layer { y_bottom: p.delta_r, thickness: p.delta_a }),
        chamber_length: p.l,
        cap_length: p.c,
        cap_segment: p.r,
        total_length: p.total_length(),
        fibre_diameter: p.phi_k,
        fibre_wall: p.min_wall,
        device: None,
        metrics: empty_metrics(),
        warnings,
    };
    spec.metrics = chamber_metrics(&spec)?;
    Ok(spec)
}

fn empty_metrics() -> ChamberMetrics {
    ChamberMetrics {
        cross_section_area: 0.0,
        chamber_areas: Vec::new(),
        nominal_volume: 0.0,
        wall_thickness_profile: Vec::new(),
        min_wall: 0.0,
    }
}

/// Polygonal quadrature of the chamber boundaries plus a sampled
/// wall-thickness profile.
pub fn chamber_metrics(spec: &ActuatorSpec) -> Result<ChamberMetrics, GeometryError> {
    if spec.outer_boundary.len() < 3 || polygon::first_self_intersection(&spec.outer_boundary).is_some() {
        return Err(GeometryError::DegenerateBoundary("outer boundary".into()));
    }
    let mut areas = Vec::with_capacity(spec.chambers.len());
    let mut profile = Vec::new();
    let mut min_wall = f64::INFINITY;
    for (k, ch) in spec.chambers.iter().enumerate() {
        let b = &ch.boundary;
        if b.len() < 3 || polygon::first_self_intersection(b).is_some() {
            return Err(GeometryError::DegenerateBoundary(format!("chamber {}", k + 1)));
        }
        if let Some(p) = b.iter().find(|p| !polygon::contains(&spec.outer_boundary, **p)) {
            return Err(GeometryError::ChamberExceedsEnvelope(format!(
                "chamber {} vertex ({:.3}, {:.3}) lies outside the outer boundary",
                k + 1,
                p[0],
                p[1]
            )));
        }
        areas.push(polygon::area(b));
        for p in b {
            min_wall = min_wall.min(polygon::boundary_distance(*p, &spec.outer_boundary));
        }
        let stride = (b.len() / WALL_PROFILE_SAMPLES).max(1);
        for p in b.iter().step_by(stride) {
            profile.push(WallSample {
                chamber: k,
                point: *p,
                thickness: polygon::boundary_distance(*p, &spec.outer_boundary),
            });
        }
    }
    for i in 0..spec.chambers.len() {
        for j in (i + 1)..spec.chambers.len() {
            let (a, b) = (&spec.chambers[i].boundary, &spec.chambers[j].boundary);
            if a.iter().any(|p| polygon::contains(b, *p)) || b.iter().any(|p| polygon::contains(a, *p)) {
                return Err(GeometryError::DegenerateBoundary(format!("chambers {} and {} overlap", i + 1, j + 1)));
            }
        }
    }
    let total: f64 = areas.iter().sum();
    Ok(ChamberMetrics {
        cross_section_area: total,
        chamber_areas: areas,
        nominal_volume: total * spec.chamber_length,
        wall_thickness_profile: profile,
        min_wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_a_defaults_hit_area_and_volume() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let m = &spec.metrics;
        assert!((m.cross_section_area - 20.8).abs() < 0.2, "{}", m.cross_section_area);
        assert!((m.nominal_volume - 552.0).abs() < 6.0, "{}", m.nominal_volume);
        assert_eq!(spec.total_length, 37.5);
        assert!(spec.warnings.is_empty(), "{:?}", spec.warnings);
        let ChamberShape::FilletedSegment { fillet, .. } = spec.chambers[0].shape else { panic!("wrong shape") };
        assert!(fillet > 0.0 && fillet < 1.6);
    }

    #[test]
    fn chamber_larger_than_envelope_rejected() {
        let p = GeometryAParams { d_i: 20.0, d_o: 18.0, ..Default::default() };
        assert!(matches!(build_geometry_a(&p), Err(GeometryError::ChamberExceedsEnvelope(_))));
    }

    #[test]
    fn non_positive_dimension_rejected() {
        let p = GeometryAParams { l: 0.0, ..Default::default() };
        assert!(matches!(build_geometry_a(&p), Err(GeometryError::NonPositive { name: "L", .. })));
    }

    #[test]
    fn thin_cover_warns_then_errors() {
        let warn = GeometryAParams { delta_t: 0.25, ..Default::default() };
        let spec = build_geometry_a(&warn).unwrap();
        assert_eq!(spec.warnings.len(), 1);
        let bad = GeometryAParams { delta_t: 0.05, ..Default::default() };
        assert!(matches!(build_geometry_a(&bad), Err(GeometryError::CoverBelowFloor { .. })));
    }

    #[test]
    fn explicit_fillet_radius() {
        let sharp = GeometryAParams { fillet: FilletSpec::Radius(0.0), ..Default::default() };
        let spec = build_geometry_a(&sharp).unwrap();
        // circular segment, radius 7, floor at 3.8
        let d: f64 = 3.8;
        let exact = 49.0 * (d / 7.0).acos() - d * (49.0 - d * d).sqrt();
        assert!((spec.metrics.cross_section_area - exact).abs() / exact < 1e-4);
        let bad = GeometryAParams { fillet: FilletSpec::Radius(2.0), ..Default::default() };
        assert!(matches!(build_geometry_a(&bad), Err(GeometryError::FilletInfeasible(_))));
    }

    #[test]
    fn unreachable_area_target() {
        let p = GeometryAParams { fillet: FilletSpec::MatchArea(40.0), ..Default::default() };
        assert!(matches!(build_geometry_a(&p), Err(GeometryError::FilletInfeasible(_))));
    }

    #[test]
    fn geometry_b_defaults() {
        let spec = build_geometry_b(&GeometryBParams::default()).unwrap();
        let m = &spec.metrics;
        assert!((m.cross_section_area - 25.13).abs() < 0.2);
        assert!((m.nominal_volume - 666.0).abs() < 7.0);
        assert_eq!(spec.chambers[0].chirality, Some(Chirality::Cw));
        assert_eq!(spec.chambers[1].chirality, Some(Chirality::Ccw));
        assert!(m.min_wall >= 0.5);
    }

    #[test]
    fn geometry_b_overlap_and_thin_walls() {
        let p = GeometryBParams { chamber_separation: 0.0, ..Default::default() };
        assert!(matches!(build_geometry_b(&p), Err(GeometryError::ChambersOverlap { .. })));
        let p = GeometryBParams { chamber_separation: 4.3, ..Default::default() };
        assert!(matches!(build_geometry_b(&p), Err(GeometryError::WallBelowFloor { .. })));
        let p = GeometryBParams { chamber_height: 5.6, ..Default::default() };
        assert!(matches!(build_geometry_b(&p), Err(GeometryError::WallBelowFloor { location: "crown", .. })));
    }

    #[test]
    fn mirrored_b_keeps_metrics() {
        let spec = build_geometry_b(&GeometryBParams::default()).unwrap();
        let m = spec.mirrored();
        let (a, b) = (&spec.metrics, &m.metrics);
        assert!((a.cross_section_area - b.cross_section_area).abs() < 1e-12);
        assert!((a.min_wall - b.min_wall).abs() < 1e-9);
        assert_eq!(m.chambers[0].chirality, Some(Chirality::Cw));
        let back = m.mirrored();
        assert_eq!(back.chambers[0].boundary.len(), spec.chambers[0].boundary.len());
    }

    #[test]
    fn serialisation_is_deterministic_and_round_trips() {
        let a = build_geometry_a(&GeometryAParams::default()).unwrap();
        let b = build_geometry_a(&GeometryAParams::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let back = ActuatorSpec::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(a.to_json().contains("\"schema_version\": 1"));
    }

    #[test]
    fn self_intersecting_chamber_rejected() {
        let mut spec = build_geometry_b(&GeometryBParams::default()).unwrap();
        spec.chambers[0].boundary.swap(10, 300);
        assert!(matches!(chamber_metrics(&spec), Err(GeometryError::DegenerateBoundary(_))));
    }

    #[test]
    fn device_validation() {
        assert!(DeviceSpec::default().validate().is_ok());
        let d = DeviceSpec { actuator_section_length: 70.0, ..Default::default() };
        assert!(d.validate().is_err());
        let d = DeviceSpec {
            embedded_payload: Some(Payload { diameter: 12.0, ..Default::default() }),
            ..Default::default()
        };
        assert!(d.validate().is_err());
    }
}
