//! Tip workspace over a pressure sweep.

use serde::{Deserialize, Serialize};

use crate::fiberpath::WindingSpec;
use crate::geometry::{ActuatorSpec, DeviceSpec};
use crate::materials::MaterialLibrary;
use crate::postprocess::PressureSchedule;

use super::{solve_quasi_static, MechanicsError, SegmentModel, SolveResult};

/// Cylinder about the undeformed axis, `|z| <= length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub radius: f64,
    pub length: f64,
}

impl Corridor {
    pub fn from_device(device: &DeviceSpec) -> Self {
        Self { radius: 0.5 * device.body_diameter, length: device.body_length }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        p[0].hypot(p[1]) <= self.radius && p[2].abs() <= self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceReport {
    pub pressures: Vec<f64>,
    pub tips: Vec<[f64; 3]>,
    /// Largest base-to-tip distance.
    pub max_reach: f64,
    /// Area enclosed by the base and the tip trajectory in the bending
    /// plane.
    pub swept_area: f64,
    /// Cumulative tip path length at each pressure.
    pub path_length: Vec<f64>,
    pub corridor: Option<Corridor>,
    pub fits_corridor: Option<bool>,
}

pub fn workspace(
    spec: &ActuatorSpec,
    windings: &[WindingSpec],
    materials: &MaterialLibrary,
    schedule: &PressureSchedule,
    seg: &SegmentModel,
    corridor: Option<Corridor>,
) -> Result<WorkspaceReport, MechanicsError> {
    let r = solve_quasi_static(spec, windings, materials, schedule, seg)?;
    Ok(report_from(&r, corridor))
}

pub fn report_from(r: &SolveResult, corridor: Option<Corridor>) -> WorkspaceReport {
    let tips = r.tip_xyz.clone();
    let norm = |p: &[f64; 3]| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let max_reach = tips.iter().map(norm).fold(0.0, f64::max);
    let mut ring: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    ring.extend(tips.iter().map(|t| [t[0].hypot(t[1]), t[2]]));
    let swept_area = crate::geometry::polygon::area(&ring);
    let mut path_length = Vec::with_capacity(tips.len());
    let mut acc = 0.0;
    for (i, t) in tips.iter().enumerate() {
        if i > 0 {
            let p = tips[i - 1];
            acc += norm(&[t[0] - p[0], t[1] - p[1], t[2] - p[2]]);
        }
        path_length.push(acc);
    }
    let fits = corridor.map(|c| tips.iter().all(|t| c.contains(*t)));
    WorkspaceReport {
        pressures: r.pressures.clone(),
        tips,
        max_reach,
        swept_area,
        path_length,
        corridor,
        fits_corridor: fits,
    }
}

impl WorkspaceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pressure_kPa,tip_x,tip_y,tip_z,path_length_mm\n");
        for i in 0..self.tips.len() {
            let t = self.tips[i];
            s.push_str(&format!(
                "{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                self.pressures[i], t[0], t[1], t[2], self.path_length[i]
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiberpath::HelixStyle;
    use crate::geometry::{build_geometry_a, GeometryAParams};

    #[test]
    fn zero_pressure_is_straight_pose() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Sh, 30);
        let sched = PressureSchedule::Explicit { points: vec![(0.0, 0.0)] };
        let rep = workspace(&spec, &[w], &MaterialLibrary::default(), &sched, &SegmentModel::default(), None).unwrap();
        assert_eq!(rep.tips, vec![[0.0, 0.0, 37.5]]);
        assert_eq!(rep.max_reach, 37.5);
        assert_eq!(rep.swept_area, 0.0);
    }

    #[test]
    fn ramp_trajectory_length_grows() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let w = WindingSpec::for_spec(&spec, HelixStyle::Dh, 30);
        let sched = PressureSchedule::Proportional { t_end: 1.0, p_max: 100.0, samples: 21 };
        let rep = workspace(&spec, &[w], &MaterialLibrary::default(), &sched, &SegmentModel::default(), None).unwrap();
        assert!(rep.path_length.windows(2).all(|p| p[1] > p[0]));
        assert!(rep.swept_area > 0.0);
    }

    #[test]
    fn corridor_membership() {
        let c = Corridor { radius: 9.0, length: 60.5 };
        assert!(c.contains([3.0, 4.0, 10.0]));
        assert!(!c.contains([9.0, 1.0, 0.0]));
        assert!(!c.contains([0.0, 0.0, -61.0]));
    }
}
