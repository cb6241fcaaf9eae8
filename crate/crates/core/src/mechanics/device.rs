//! Embedding an actuator in a cylindrical device body.

use crate::geometry::{polygon, ActuatorSpec, DeviceComposition, DeviceSpec};

use super::MechanicsError;

/// Returns a copy of `spec` whose resisting section includes the device
/// body around it, plus the rigid payload over its axial span when
/// `payload` is set.
pub fn compose_device(spec: &ActuatorSpec, device: &DeviceSpec, payload: bool) -> Result<ActuatorSpec, MechanicsError> {
    device.validate()?;
    let body_r = 0.5 * device.body_diameter;
    if spec.outer_radius > body_r + 1e-12 {
        return Err(MechanicsError::DeviceMismatch(format!(
            "actuator radius {} mm exceeds body radius {body_r} mm",
            spec.outer_radius
        )));
    }
    if spec.total_length > device.actuator_section_length + 1e-9 {
        return Err(MechanicsError::DeviceMismatch(format!(
            "actuator length {} mm exceeds the actuator section of {} mm",
            spec.total_length, device.actuator_section_length
        )));
    }
    if payload {
        let p = device
            .embedded_payload
            .as_ref()
            .ok_or_else(|| MechanicsError::DeviceMismatch("payload requested but none is defined".into()))?;
        let ring = polygon::sample_circle(p.centre, 0.5 * p.diameter, 256);
        let in_body = |q: &[f64; 2]| {
            if q[0].hypot(q[1]) > body_r {
                return false;
            }
            if device.fill_flat_side && q[1] < spec.flat_y {
                return true;
            }
            q[0].hypot(q[1]) > spec.outer_radius
        };
        if !ring.iter().all(in_body) {
            return Err(MechanicsError::DeviceMismatch(
                "payload must lie inside the device body, clear of the actuator".into(),
            ));
        }
    }
    let mut out = spec.clone();
    out.device = Some(DeviceComposition { device: device.clone(), payload_active: payload });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiberpath::{HelixStyle, WindingSpec};
    use crate::geometry::{build_geometry_a, GeometryAParams, Payload};
    use crate::materials::MaterialLibrary;
    use crate::mechanics::{Prepared, SegmentModel};

    fn theta(spec: &ActuatorSpec) -> f64 {
        let seg = SegmentModel::default();
        let w = WindingSpec::for_spec(spec, HelixStyle::Dh, 30);
        Prepared::new(spec, &[w], &MaterialLibrary::default(), &seg).unwrap().point(100.0, &seg).unwrap().theta_deg
    }

    #[test]
    fn empty_body_is_identity() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let d = DeviceSpec { fill_flat_side: false, embedded_payload: None, ..Default::default() };
        let composed = compose_device(&spec, &d, false).unwrap();
        assert!((theta(&composed) - theta(&spec)).abs() < 1e-9);
    }

    #[test]
    fn body_and_payload_reduce_bending() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let d = DeviceSpec::default();
        let bare = theta(&spec);
        let body = theta(&compose_device(&spec, &d, false).unwrap());
        let cam = theta(&compose_device(&spec, &d, true).unwrap());
        assert!(body < bare && cam < body, "{bare} {body} {cam}");
    }

    #[test]
    fn misfits_rejected() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let small = DeviceSpec { body_diameter: 16.0, ..Default::default() };
        assert!(matches!(compose_device(&spec, &small, false), Err(MechanicsError::DeviceMismatch(_))));
        let short = DeviceSpec { actuator_section_length: 30.0, body_length: 60.5, ..Default::default() };
        assert!(compose_device(&spec, &short, false).is_err());
        let clash = DeviceSpec {
            embedded_payload: Some(Payload { centre: [0.0, 1.0], ..Default::default() }),
            ..Default::default()
        };
        assert!(compose_device(&spec, &clash, true).is_err());
        assert!(compose_device(&spec, &clash, false).is_ok());
    }
}
