//! Helix fibre windings over the chamber offset surface.
//!
//! A winding surface is a prism whose cross-section is a closed curve. Points
//! on it are addressed by a developed coordinate `(s, z)`: `s` is arc length
//! around the cross-section curve (counter-clockwise, seen from the base) and
//! `z` is the axial coordinate. Helices are generated with exact integer
//! bookkeeping so that points visited by both passes of a double helix have
//! bit-identical developed coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ActuatorSpec, ChamberShape, Chirality, Point2};

pub type Point3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("turn count must be in 1..=1000 (got {0})")]
    Turns(u32),
    #[error("samples_per_turn must be at least 16 (got {0})")]
    SamplesPerTurn(usize),
    #[error("axial span must be positive (got {0})")]
    AxialSpan(f64),
    #[error("radial offset must be non-negative (got {0})")]
    RadialOffset(f64),
    #[error("chamber index {index} out of range ({count} chambers)")]
    Chamber { index: usize, count: usize },
    #[error("winding surface leaves the actuator envelope: {0}")]
    Surface(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HelixStyle {
    Sh,
    Dh,
}

impl HelixStyle {
    /// Number of fibre passes over each axial station.
    pub fn passes(self) -> f64 {
        match self {
            HelixStyle::Sh => 1.0,
            HelixStyle::Dh => 2.0,
        }
    }
}

impl std::fmt::Display for HelixStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HelixStyle::Sh => "SH",
            HelixStyle::Dh => "DH",
        })
    }
}

impl std::str::FromStr for HelixStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SH" => Ok(HelixStyle::Sh),
            "DH" => Ok(HelixStyle::Dh),
            other => Err(format!("unknown helix style '{other}' (expected SH or DH)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingSpec {
    pub style: HelixStyle,
    pub turns: u32,
    pub chirality: Chirality,
    /// Fibre centreline distance from the chamber wall.
    pub radial_offset: f64,
    pub axial_span: f64,
    pub samples_per_turn: usize,
    /// Start position as a fraction of the surface perimeter.
    pub phase: f64,
    pub chamber: usize,
    /// Model the fibre at half its true radius.
    pub halved_fibre_radius: bool,
}

impl WindingSpec {
    /// Winding with the usual defaults for `spec`: offset `delta_t + phi_k/2`,
    /// span equal to the chamber length, 36 samples per turn and the chamber's
    /// chirality annotation (counter-clockwise when there is none).
    pub fn for_spec(spec: &ActuatorSpec, style: HelixStyle, turns: u32) -> Self {
        Self {
            style,
            turns,
            chirality: spec.chambers.first().and_then(|c| c.chirality).unwrap_or(Chirality::Ccw),
            radial_offset: spec.default_fibre_offset(),
            axial_span: spec.chamber_length,
            samples_per_turn: 36,
            phase: 0.0,
            chamber: 0,
            halved_fibre_radius: false,
        }
    }

    pub fn on_chamber(mut self, spec: &ActuatorSpec, chamber: usize) -> Self {
        self.chamber = chamber;
        if let Some(c) = spec.chambers.get(chamber).and_then(|c| c.chirality) {
            self.chirality = c;
        }
        self
    }

    pub fn validate(&self) -> Result<(), FiberError> {
        if self.turns == 0 || self.turns > 1000 {
            return Err(FiberError::Turns(self.turns));
        }
        if self.samples_per_turn < 16 {
            return Err(FiberError::SamplesPerTurn(self.samples_per_turn));
        }
        if !(self.axial_span > 0.0 && self.axial_span.is_finite()) {
            return Err(FiberError::AxialSpan(self.axial_span));
        }
        if !(self.radial_offset >= 0.0 && self.radial_offset.is_finite()) {
            return Err(FiberError::RadialOffset(self.radial_offset));
        }
        Ok(())
    }

    pub fn pitch(&self) -> f64 {
        self.axial_span / self.turns as f64
    }

    pub fn turn_density(&self) -> f64 {
        self.turns as f64 / self.axial_span
    }

    /// Turns per unit length counting both passes of a double helix.
    pub fn effective_turn_density(&self) -> f64 {
        self.style.passes() * self.turn_density()
    }
}

/// Cross-section curve of the prismatic winding surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindingSurface {
    /// Arc of `radius` about the origin above `chord_y`, closed by the chord.
    /// `s = 0` at the right-hand corner.
    Segment { radius: f64, chord_y: f64 },
    /// Full circle; `s = 0` at the bottom (angle -pi/2).
    Circle { centre: Point2, radius: f64 },
}

impl WindingSurface {
    fn segment_parts(radius: f64, chord_y: f64) -> (f64, f64, f64) {
        let t0 = (chord_y / radius).asin();
        let xc = radius * t0.cos();
        (t0, xc, radius * (PI - 2.0 * t0))
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            WindingSurface::Segment { radius, chord_y } => {
                let (_, xc, arc) = Self::segment_parts(radius, chord_y);
                arc + 2.0 * xc
            }
            WindingSurface::Circle { radius, .. } => 2.0 * PI * radius,
        }
    }

    /// Point at arc-length `s` (taken modulo the perimeter).
    pub fn point_at(&self, s: f64) -> Point2 {
        let s = s.rem_euclid(self.perimeter());
        match *self {
            WindingSurface::Segment { radius, chord_y } => {
                let (t0, xc, arc) = Self::segment_parts(radius, chord_y);
                if s < arc {
                    let t = t0 + s / radius;
                    [radius * t.cos(), radius * t.sin()]
                } else {
                    [-xc + (s - arc), chord_y]
                }
            }
            WindingSurface::Circle { centre, radius } => {
                let t = -0.5 * PI + s / radius;
                [centre[0] + radius * t.cos(), centre[1] + radius * t.sin()]
            }
        }
    }

    /// Distance from a cross-section point to the surface curve.
    pub fn distance(&self, p: Point2) -> f64 {
        match *self {
            WindingSurface::Segment { radius, chord_y } => {
                let (t0, xc, _) = Self::segment_parts(radius, chord_y);
                let t = p[1].atan2(p[0]);
                let to_arc = if (t0..=PI - t0).contains(&t) {
                    (p[0].hypot(p[1]) - radius).abs()
                } else {
                    let c = [radius * t0.cos(), radius * t0.sin()];
                    crate::geometry::polygon::dist(p, c).min(crate::geometry::polygon::dist(p, [-c[0], c[1]]))
                };
                let to_chord = crate::geometry::polygon::point_segment_distance(p, [-xc, chord_y], [xc, chord_y]);
                to_arc.min(to_chord)
            }
            WindingSurface::Circle { centre, radius } => ((p[0] - centre[0]).hypot(p[1] - centre[1]) - radius).abs(),
        }
    }

    /// Reflection across `x = 0`.
    pub fn mirrored(&self) -> Self {
        match *self {
            s @ WindingSurface::Segment { .. } => s,
            WindingSurface::Circle { centre, radius } => {
                WindingSurface::Circle { centre: [-centre[0], centre[1]], radius }
            }
        }
    }

    /// Developed coordinate of the reflection of the point at `s`.
    fn mirrored_s(&self, s: f64) -> f64 {
        let p = self.perimeter();
        match *self {
            WindingSurface::Segment { radius, chord_y } => {
                let (_, _, arc) = Self::segment_parts(radius, chord_y);
                (arc - s).rem_euclid(p)
            }
            WindingSurface::Circle { .. } => (-s).rem_euclid(p),
        }
    }
}

/// Offset surface the fibre of `winding` lies on.
pub fn winding_surface(spec: &ActuatorSpec, winding: &WindingSpec) -> Result<WindingSurface, FiberError> {
    let chamber = spec
        .chambers
        .get(winding.chamber)
        .ok_or(FiberError::Chamber { index: winding.chamber, count: spec.chambers.len() })?;
    let off = winding.radial_offset;
    let surface = match chamber.shape {
        ChamberShape::FilletedSegment { radius, floor_y, .. } => {
            WindingSurface::Segment { radius: radius + off, chord_y: floor_y - off }
        }
        ChamberShape::Circle { centre, radius } => WindingSurface::Circle { centre, radius: radius + off },
    };
    let reach = match surface {
        WindingSurface::Segment { radius, chord_y } => {
            if chord_y <= spec.flat_y {
                return Err(FiberError::Surface(format!("fibre chord at y = {chord_y} mm is below the flat side")));
            }
            radius
        }
        WindingSurface::Circle { centre, radius } => centre[0].hypot(centre[1]) + radius,
    };
    if reach >= spec.outer_radius {
        return Err(FiberError::Surface(format!("fibre reaches {reach} mm, outer radius is {}", spec.outer_radius)));
    }
    Ok(surface)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberPath {
    pub points: Vec<Point3>,
    /// Developed `(s, z)` coordinate of every point.
    pub developed: Vec<[f64; 2]>,
    pub pitch: f64,
    pub total_length: f64,
    pub style: HelixStyle,
    pub turns: u32,
    pub chirality: Chirality,
    pub axial_span: f64,
    pub samples_per_turn: usize,
    pub chamber: usize,
    pub surface: WindingSurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub pitch: f64,
    pub total_length: f64,
    /// Turns per mm of axial span.
    pub turn_density: f64,
}

fn polyline_length(points: &[Point3]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .sum()
}

/// Generates the winding. SH runs base to tip; DH runs base to tip and back
/// as one continuous polyline.
pub fn generate_helix(spec: &ActuatorSpec, winding: &WindingSpec) -> Result<FiberPath, FiberError> {
    winding.validate()?;
    let surface = winding_surface(spec, winding)?;
    let spt = winding.samples_per_turn;
    let n = winding.turns as usize * spt;
    let dir = winding.chirality.sign();
    let perim = surface.perimeter();
    let span = winding.axial_span;
    let frac = |i: usize| (winding.phase + dir * (i % spt) as f64 / spt as f64).rem_euclid(1.0);

    let mut developed = Vec::with_capacity(2 * n + 1);
    for i in 0..=n {
        developed.push([frac(i) * perim, span * i as f64 / n as f64]);
    }
    if winding.style == HelixStyle::Dh {
        // the return pass keeps the sense of rotation while z decreases,
        // which reverses the handedness and makes the passes cross
        for j in 1..=n {
            developed.push([frac((n + j) % spt) * perim, span * (n - j) as f64 / n as f64]);
        }
    }
    let points: Vec<Point3> = developed
        .iter()
        .map(|&[s, z]| {
            let p = surface.point_at(s);
            [p[0], p[1], z]
        })
        .collect();
    Ok(FiberPath {
        total_length: polyline_length(&points),
        points,
        developed,
        pitch: winding.pitch(),
        style: winding.style,
        turns: winding.turns,
        chirality: winding.chirality,
        axial_span: span,
        samples_per_turn: spt,
        chamber: winding.chamber,
        surface,
    })
}

/// Reflection across the sagittal plane `x = 0` with chirality flipped.
/// For a two-chamber spec the path moves to the opposite chamber.
pub fn mirror_path(path: &FiberPath) -> FiberPath {
    let surface = path.surface.mirrored();
    FiberPath {
        points: path.points.iter().map(|p| [-p[0], p[1], p[2]]).collect(),
        developed: path.developed.iter().map(|d| [path.surface.mirrored_s(d[0]), d[1]]).collect(),
        pitch: path.pitch,
        total_length: path.total_length,
        style: path.style,
        turns: path.turns,
        chirality: path.chirality.flipped(),
        axial_span: path.axial_span,
        samples_per_turn: path.samples_per_turn,
        chamber: match path.surface {
            WindingSurface::Circle { .. } => path.chamber ^ 1,
            WindingSurface::Segment { .. } => path.chamber,
        },
        surface,
    }
}

pub fn path_metrics(path: &FiberPath) -> PathMetrics {
    PathMetrics {
        pitch: path.pitch,
        total_length: polyline_length(&path.points),
        turn_density: path.turns as f64 / path.axial_span,
    }
}

/// Largest distance from a path point to its winding surface.
pub fn surface_deviation(path: &FiberPath) -> f64 {
    path.points.iter().map(|p| path.surface.distance([p[0], p[1]])).fold(0.0, f64::max)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Intersection test for half-open segments `[p0, p1)` and `[q0, q1)`.
/// Collinear overlaps are not counted.
fn half_open_hit(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let d1 = orient(q0, q1, p0);
    let d2 = orient(q0, q1, p1);
    let d3 = orient(p0, p1, q0);
    let d4 = orient(p0, p1, q1);
    if d2 == 0.0 || d4 == 0.0 {
        return false;
    }
    if d1 == 0.0 && d3 == 0.0 {
        // shared start point, or a collinear overlap
        return p0 == q0;
    }
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

struct Piece {
    seg: usize,
    a: [f64; 2],
    b: [f64; 2],
}

/// Splits developed segments where they cross the seam at `s = cut`.
/// Coordinates are re-based so the seam sits at 0.
fn developed_pieces(developed: &[[f64; 2]], perim: f64, cut: f64) -> Vec<Piece> {
    let rebased: Vec<[f64; 2]> = developed.iter().map(|d| [(d[0] - cut).rem_euclid(perim), d[1]]).collect();
    let mut out = Vec::with_capacity(developed.len());
    for (k, w) in rebased.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let mut ds = b[0] - a[0];
        if ds > 0.5 * perim {
            ds -= perim;
        } else if ds < -0.5 * perim {
            ds += perim;
        }
        let end = a[0] + ds;
        if (0.0..perim).contains(&end) || end == a[0] {
            out.push(Piece { seg: k, a, b: [end, b[1]] });
            continue;
        }
        let seam = if end >= perim { perim } else { 0.0 };
        let t = (seam - a[0]) / ds;
        let zc = a[1] + t * (b[1] - a[1]);
        out.push(Piece { seg: k, a, b: [seam, zc] });
        // `b` is already the wrapped end; recomputing it can miss a shared
        // vertex by an ulp
        out.push(Piece { seg: k, a: [perim - seam, zc], b });
    }
    out
}

/// Transversal self-crossings of a double-helix path on the developed
/// surface. Segments are half-open, so a point shared by consecutive
/// segments is counted at most once; adjacent segments are never compared.
/// Single-helix paths return 0.
pub fn crossing_count(path: &FiberPath) -> usize {
    if path.style == HelixStyle::Sh {
        return 0;
    }
    let perim = path.surface.perimeter();
    // every vertex sits at the start fraction plus a multiple of 1/spt, so a
    // seam half a step away never passes through one
    let cut = path.developed[0][0] + 0.5 * perim / path.samples_per_turn as f64;
    let mut pieces = developed_pieces(&path.developed, perim, cut);
    let zmin = |p: &Piece| p.a[1].min(p.b[1]);
    let zmax = |p: &Piece| p.a[1].max(p.b[1]);
    pieces.sort_by(|x, y| zmin(x).total_cmp(&zmin(y)).then(x.seg.cmp(&y.seg)));
    let mut count = 0;
    for i in 0..pieces.len() {
        let p = &pieces[i];
        let top = zmax(p);
        for q in &pieces[i + 1..] {
            if zmin(q) > top {
                break;
            }
            if p.seg.abs_diff(q.seg) <= 1 {
                continue;
            }
            let (smin, smax) = (p.a[0].min(p.b[0]), p.a[0].max(p.b[0]));
            if q.a[0].max(q.b[0]) < smin || q.a[0].min(q.b[0]) > smax {
                continue;
            }
            if half_open_hit(p.a, p.b, q.a, q.b) {
                count += 1;
            }
        }
    }
    count
}

/// CSV with `#` metadata comments followed by `x_mm,y_mm,z_mm` rows.
pub fn path_csv(path: &FiberPath) -> String {
    let mut s = format!(
        "# style={} turns={} chirality={} pitch_mm={} total_length_mm={} chamber={}\nx_mm,y_mm,z_mm\n",
        path.style, path.turns, path.chirality, path.pitch, path.total_length, path.chamber
    );
    for p in &path.points {
        s.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry_a, build_geometry_b, GeometryAParams, GeometryBParams};

    fn spec_a() -> ActuatorSpec {
        build_geometry_a(&GeometryAParams::default()).unwrap()
    }

    #[test]
    fn pitch_and_span() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 100);
        let p = generate_helix(&spec, &w).unwrap();
        assert!((p.pitch - 0.265).abs() < 1e-12);
        let w9 = WindingSpec::for_spec(&spec, HelixStyle::Sh, 9);
        let p9 = generate_helix(&spec, &w9).unwrap();
        let zs: Vec<f64> = p9.points.iter().map(|p| p[2]).collect();
        let extent = zs.iter().cloned().fold(f64::MIN, f64::max) - zs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((extent - 26.5).abs() < 1e-9);
        assert!(zs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn default_offset_surface() {
        let spec = spec_a();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 30);
        assert!((w.radial_offset - 0.403).abs() < 1e-12);
        let WindingSurface::Segment { radius, chord_y } = winding_surface(&spec, &w).unwrap() else { panic!() };
        assert!((radius - 7.403).abs() < 1e-12);
        assert!((chord_y - 3.397).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_windings() {
        let spec = spec_a();
        let mut w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 0);
        assert_eq!(generate_helix(&spec, &w), Err(FiberError::Turns(0)));
        w.turns = 10;
        w.samples_per_turn = 8;
        assert_eq!(generate_helix(&spec, &w), Err(FiberError::SamplesPerTurn(8)));
        w.samples_per_turn = 36;
        w.chamber = 3;
        assert!(matches!(generate_helix(&spec, &w), Err(FiberError::Chamber { .. })));
    }

    #[test]
    fn points_lie_on_surface() {
        let spec = spec_a();
        for style in [HelixStyle::Sh, HelixStyle::Dh] {
            let p = generate_helix(&spec, &WindingSpec::for_spec(&spec, style, 17)).unwrap();
            assert!(surface_deviation(&p) < 1e-6);
        }
        let b = build_geometry_b(&GeometryBParams::default()).unwrap();
        let w = WindingSpec::for_spec(&b, HelixStyle::Sh, 100).on_chamber(&b, 1);
        let p = generate_helix(&b, &w).unwrap();
        assert!(surface_deviation(&p) < 1e-6);
        assert_eq!(p.chirality, Chirality::Ccw);
    }

    #[test]
    fn sh_never_crosses() {
        let spec = spec_a();
        let p = generate_helix(&spec, &WindingSpec::for_spec(&spec, HelixStyle::Sh, 50)).unwrap();
        assert_eq!(crossing_count(&p), 0);
    }

    #[test]
    fn single_turn_dh_crosses_once() {
        // out along one turn and back along the reversed-handedness turn:
        // the passes meet once half-way up, plus the shared start at the base
        // which is a touch, not a crossing
        let spec = spec_a();
        let p = generate_helix(&spec, &WindingSpec::for_spec(&spec, HelixStyle::Dh, 1)).unwrap();
        assert_eq!(crossing_count(&p), 1);
    }

    #[test]
    fn closing_touch_across_the_seam_is_not_a_crossing() {
        // the last segment wraps the seam and ends on the first vertex
        let spec = spec_a();
        for chirality in [Chirality::Cw, Chirality::Ccw] {
            for k in 0..200 {
                for turns in 1..4 {
                    let mut w = WindingSpec::for_spec(&spec, HelixStyle::Dh, turns);
                    w.chirality = chirality;
                    w.phase = k as f64 / 200.0 + 0.4369396918993608 / 200.0;
                    let p = generate_helix(&spec, &w).unwrap();
                    assert_eq!(crossing_count(&p), 2 * turns as usize - 1, "{chirality} phase {}", w.phase);
                }
            }
        }
    }

    #[test]
    fn mirror_is_involution() {
        let b = build_geometry_b(&GeometryBParams::default()).unwrap();
        let w = WindingSpec::for_spec(&b, HelixStyle::Sh, 100);
        let p = generate_helix(&b, &w).unwrap();
        let m = mirror_path(&p);
        assert_eq!(m.chirality, Chirality::Ccw);
        assert_eq!(m.chamber, 1);
        assert_eq!(m.pitch, p.pitch);
        assert!((path_metrics(&m).total_length - p.total_length).abs() < 1e-9);
        assert!(surface_deviation(&m) < 1e-6);
        let mm = mirror_path(&m);
        for (a, b) in mm.points.iter().zip(&p.points) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirrored_developed_coordinates_match_points() {
        let spec = spec_a();
        let p = generate_helix(&spec, &WindingSpec::for_spec(&spec, HelixStyle::Dh, 3)).unwrap();
        let m = mirror_path(&p);
        for (pt, d) in m.points.iter().zip(&m.developed) {
            let q = m.surface.point_at(d[0]);
            assert!((q[0] - pt[0]).abs() < 1e-9 && (q[1] - pt[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn straight_path_length() {
        let spec = spec_a();
        let mut p = generate_helix(&spec, &WindingSpec::for_spec(&spec, HelixStyle::Sh, 1)).unwrap();
        p.points = vec![[0.0, 0.0, 0.0], [0.0, 0.0, 4.0], [0.0, 0.0, 10.0]];
        assert_eq!(path_metrics(&p).total_length, 10.0);
    }

    #[test]
    fn turn_density_and_refinement() {
        let spec = spec_a();
        let mut w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 100);
        let m = path_metrics(&generate_helix(&spec, &w).unwrap());
        assert!((m.turn_density - 100.0 / 26.5).abs() < 1e-12);
        w.samples_per_turn = 72;
        let fine = path_metrics(&generate_helix(&spec, &w).unwrap());
        assert!((fine.total_length - m.total_length).abs() / fine.total_length < 1e-3);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let spec = spec_a();
        let p = generate_helix(&spec, &WindingSpec::for_spec(&spec, HelixStyle::Sh, 2)).unwrap();
        let csv = path_csv(&p);
        assert!(csv.starts_with("# style=SH turns=2"));
        assert_eq!(csv.lines().count(), 2 + p.points.len());
    }
}
