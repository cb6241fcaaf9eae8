//! Strip discretisation of a resisting cross-section.
//!
//! The section is cut into horizontal strips of equal height. Each material
//! component keeps its width per strip, so a bending strain field that only
//! depends on `y` can be integrated with a single pass.

use crate::geometry::{polygon, ActuatorSpec};
use crate::materials::{HyperelasticModel, MaterialLibrary, FIBERGLASS_LAYER};

use super::MechanicsError;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub model: HyperelasticModel,
    pub widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    /// Strip centres.
    pub ys: Vec<f64>,
    pub dy: f64,
    /// Reference line of the strain field: the layer's neutral plane when
    /// there is one, otherwise the chamber centroid.
    pub y_ref: f64,
    /// Whether an inextensible layer pins zero axial strain at `y_ref`.
    pub layered: bool,
    pub components: Vec<Component>,
    pub y_min: f64,
    pub y_max: f64,
}

impl Section {
    pub fn area(&self) -> f64 {
        self.components.iter().flat_map(|c| c.widths.iter()).sum::<f64>() * self.dy
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }
}

/// Chord of a circle at height `y`.
pub fn circle_width(centre_y: f64, radius: f64, y: f64) -> f64 {
    let h = y - centre_y;
    if h.abs() >= radius {
        0.0
    } else {
        2.0 * (radius * radius - h * h).sqrt()
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Total chamber area and its centroid height.
pub fn chamber_area_centroid(spec: &ActuatorSpec) -> (f64, f64) {
    let mut area = 0.0;
    let mut moment = 0.0;
    for c in &spec.chambers {
        let a = polygon::area(&c.boundary);
        area += a;
        moment += a * polygon::centroid(&c.boundary)[1];
    }
    (area, moment / area)
}

/// Builds the strip model. `silicone` names the actuator body material;
/// `with_payload` includes the device payload when the `ActuatorSpec` carries an
/// active one.
pub fn build_section(
    spec: &ActuatorSpec,
    materials: &MaterialLibrary,
    silicone: &str,
    strips: usize,
    with_payload: bool,
) -> Result<Section, MechanicsError> {
    if strips < 50 {
        return Err(MechanicsError::InvalidModel(format!("need at least 50 strips (got {strips})")));
    }
    let device = spec.device.as_ref();
    // a body that adds no material must leave the strip grid untouched
    let body_r = device
        .filter(|d| d.device.fill_flat_side || 0.5 * d.device.body_diameter > spec.outer_radius)
        .map(|d| 0.5 * d.device.body_diameter);
    let y_min = body_r.map_or(spec.flat_y, |r| -r);
    let y_max = body_r.map_or(spec.outer_radius, |r| r.max(spec.outer_radius));
    let dy = (y_max - y_min) / strips as f64;
    let ys: Vec<f64> = (0..strips).map(|i| y_min + (i as f64 + 0.5) * dy).collect();

    let layer = spec.inextensible_layer;
    let mut silicone_w = Vec::with_capacity(strips);
    let mut layer_w = Vec::with_capacity(strips);
    for &y in &ys {
        let outer = polygon::scanline_width(&spec.outer_boundary, y);
        let cavities: f64 = spec.chambers.iter().map(|c| polygon::scanline_width(&c.boundary, y)).sum();
        let solid = (outer - cavities).max(0.0);
        let frac =
            layer.map_or(0.0, |l| overlap(y - 0.5 * dy, y + 0.5 * dy, l.y_bottom, l.y_bottom + l.thickness) / dy);
        layer_w.push(frac * outer);
        silicone_w.push(solid - frac * outer);
    }

    let mut components =
        vec![Component { name: silicone.to_string(), model: materials.model(silicone)?, widths: silicone_w }];
    if layer.is_some() {
        components.push(Component {
            name: FIBERGLASS_LAYER.to_string(),
            model: materials.model(FIBERGLASS_LAYER)?,
            widths: layer_w,
        });
    }

    if let Some(dc) = device {
        let d = &dc.device;
        let br = 0.5 * d.body_diameter;
        let ro = spec.outer_radius;
        let payload = d.embedded_payload.as_ref().filter(|_| dc.payload_active && with_payload);
        let mut body_w = Vec::with_capacity(strips);
        let mut payload_w = Vec::with_capacity(strips);
        for &y in &ys {
            let actuator = if d.fill_flat_side && y < spec.flat_y { 0.0 } else { circle_width(0.0, ro, y) };
            let mut w = (circle_width(0.0, br, y) - actuator).max(0.0);
            let pw = payload.map_or(0.0, |p| circle_width(p.centre[1], 0.5 * p.diameter, y));
            w = (w - pw).max(0.0);
            body_w.push(w);
            payload_w.push(pw);
        }
        components.push(Component {
            name: format!("device:{}", d.body_material),
            model: materials.model(&d.body_material)?,
            widths: body_w,
        });
        if let Some(p) = payload {
            components.push(Component {
                name: format!("payload:{}", p.material),
                model: materials.model(&p.material)?,
                widths: payload_w,
            });
        }
    }

    let (y_ref, layered) = match layer {
        Some(l) => (l.neutral_y(), true),
        None => (chamber_area_centroid(spec).1, false),
    };
    Ok(Section { ys, dy, y_ref, layered, components, y_min, y_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry_a, build_geometry_b, GeometryAParams, GeometryBParams};

    #[test]
    fn strip_area_matches_polygon_area() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let s = build_section(&spec, &MaterialLibrary::default(), "ecoflex_00_50", 4000, false).unwrap();
        let exact = polygon::area(&spec.outer_boundary) - spec.metrics.cross_section_area;
        assert!((s.area() - exact).abs() / exact < 1e-3, "{} vs {exact}", s.area());
        let layer = s.component(FIBERGLASS_LAYER).unwrap();
        let layer_area: f64 = layer.widths.iter().sum::<f64>() * s.dy;
        // 0.2 mm band just above the flat side, about 2*sqrt(81-4) wide
        assert!((layer_area - 0.2 * 2.0 * 77f64.sqrt()).abs() < 0.02);
        assert!(s.layered);
        assert!((s.y_ref - 2.1).abs() < 1e-12);
    }

    #[test]
    fn unlayered_reference_is_chamber_centroid() {
        let spec = build_geometry_b(&GeometryBParams::default()).unwrap();
        let s = build_section(&spec, &MaterialLibrary::default(), "ecoflex_00_50", 1000, false).unwrap();
        assert!(!s.layered);
        assert!((s.y_ref - 5.0).abs() < 1e-9);
    }

    #[test]
    fn circle_chords() {
        assert_eq!(circle_width(0.0, 9.0, 0.0), 18.0);
        assert_eq!(circle_width(0.0, 9.0, 9.0), 0.0);
        assert_eq!(circle_width(1.0, 2.0, 5.0), 0.0);
    }
}
