//! Radial expansion from pairs of surface nodes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NodeHistory, PostprocessError};
use crate::geometry::ActuatorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSelection {
    pub n_pairs: usize,
    /// Axial distance between stations, mm. Stations start at the base.
    pub spacing: f64,
    /// Largest accepted distance from a target point to its node, mm.
    pub tolerance: f64,
}

impl Default for PairSelection {
    fn default() -> Self {
        Self { n_pairs: 12, spacing: 2.5, tolerance: 1.0 }
    }
}

impl PairSelection {
    /// Axial stations, the last ones clamped to the chamber end.
    pub fn stations(&self, chamber_length: f64) -> Vec<f64> {
        (0..self.n_pairs).map(|k| (k as f64 * self.spacing).min(chamber_length)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPair {
    pub station_z: f64,
    pub flat: u64,
    pub curved: u64,
    /// Local wall thickness at the station.
    pub initial_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPoint {
    pub t: f64,
    pub mean: f64,
    pub per_pair: Vec<f64>,
}

fn nearest(nodes: &[(u64, [f64; 3])], target: [f64; 3]) -> (u64, [f64; 3], f64) {
    let mut best = (u64::MAX, [0.0; 3], f64::INFINITY);
    for &(id, p) in nodes {
        let d = dist(p, target);
        if d < best.2 || (d == best.2 && id < best.0) {
            best = (id, p, d);
        }
    }
    best
}

/// Picks, for each axial station, the node nearest the flat-side centreline
/// and the node nearest the opposite outer surface.
pub fn select_radial_pairs(
    nodes: &[(u64, [f64; 3])],
    spec: &ActuatorSpec,
    sel: &PairSelection,
) -> Result<Vec<RadialPair>, PostprocessError> {
    if nodes.is_empty() {
        return Err(PostprocessError::Empty("node list".into()));
    }
    if sel.n_pairs == 0 || !(sel.spacing > 0.0) || !(sel.tolerance > 0.0) {
        return Err(PostprocessError::Mismatch(
            "pair selection needs n_pairs >= 1 and positive spacing and tolerance".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(sel.n_pairs);
    for z in sel.stations(spec.chamber_length) {
        let (fa, pa, da) = nearest(nodes, [0.0, spec.flat_y, z]);
        let (fb, pb, db) = nearest(nodes, [0.0, spec.outer_radius, z]);
        if da > sel.tolerance || db > sel.tolerance || fa == fb {
            continue;
        }
        pairs.push(RadialPair { station_z: z, flat: fa, curved: fb, initial_distance: dist(pa, pb) });
    }
    if pairs.len() < sel.n_pairs {
        return Err(PostprocessError::Coverage { needed: sel.n_pairs, found: pairs.len() });
    }
    Ok(pairs)
}

/// Change of each pair's separation relative to its initial distance, and
/// the mean over pairs.
pub fn radial_expansion(
    pairs: &[RadialPair],
    histories: &BTreeMap<u64, NodeHistory>,
    t: f64,
) -> Result<ExpansionPoint, PostprocessError> {
    if pairs.is_empty() {
        return Err(PostprocessError::Empty("pair list".into()));
    }
    let get = |id: u64| histories.get(&id).ok_or(PostprocessError::MissingHistory(id));
    let mut per_pair = Vec::with_capacity(pairs.len());
    for p in pairs {
        let a = get(p.flat)?.position(t)?;
        let b = get(p.curved)?.position(t)?;
        per_pair.push(dist(a, b) - p.initial_distance);
    }
    let mean = per_pair.iter().sum::<f64>() / per_pair.len() as f64;
    Ok(ExpansionPoint { t, mean, per_pair })
}

pub fn expansion_series(
    pairs: &[RadialPair],
    histories: &BTreeMap<u64, NodeHistory>,
    times: &[f64],
) -> Result<Vec<ExpansionPoint>, PostprocessError> {
    times.iter().map(|&t| radial_expansion(pairs, histories, t)).collect()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry_a, GeometryAParams};

    fn grid(spec: &ActuatorSpec) -> Vec<(u64, [f64; 3])> {
        let mut nodes = Vec::new();
        let mut id = 0;
        for iz in 0..=106 {
            let z = iz as f64 * 0.25;
            for y in [spec.flat_y, spec.outer_radius] {
                for x in [-0.5, 0.0, 0.5] {
                    id += 1;
                    nodes.push((id, [x, y, z]));
                }
            }
        }
        nodes
    }

    #[test]
    fn regular_grid_gives_total_thickness() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let pairs = select_radial_pairs(&grid(&spec), &spec, &PairSelection::default()).unwrap();
        assert_eq!(pairs.len(), 12);
        for p in &pairs {
            assert!((p.initial_distance - 7.0).abs() < 1e-12);
        }
        assert_eq!(pairs[11].station_z, 26.5);
        assert_eq!(pairs[10].station_z, 25.0);
    }

    #[test]
    fn empty_and_uncovered() {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        assert!(matches!(select_radial_pairs(&[], &spec, &PairSelection::default()), Err(PostprocessError::Empty(_))));
        let short: Vec<_> = grid(&spec).into_iter().filter(|n| n.1[2] < 10.0).collect();
        assert!(matches!(
            select_radial_pairs(&short, &spec, &PairSelection::default()),
            Err(PostprocessError::Coverage { needed: 12, .. })
        ));
    }

    #[test]
    fn mean_of_pairs() {
        let pairs: Vec<RadialPair> = (0..12)
            .map(|k| RadialPair { station_z: k as f64, flat: 2 * k, curved: 2 * k + 1, initial_distance: 7.0 })
            .collect();
        let mut h = BTreeMap::new();
        for k in 0..12u64 {
            let grow = if k == 3 { 1.2 } else { 0.0 };
            h.insert(2 * k, NodeHistory::new(2 * k, [0.0, 2.0, k as f64], vec![(1.0, [0.0; 3])]).unwrap());
            h.insert(
                2 * k + 1,
                NodeHistory::new(2 * k + 1, [0.0, 9.0, k as f64], vec![(1.0, [0.0, grow, 0.0])]).unwrap(),
            );
        }
        let e = radial_expansion(&pairs, &h, 1.0).unwrap();
        assert!((e.mean - 0.1).abs() < 1e-15);
        assert_eq!(radial_expansion(&pairs, &h, 0.0).unwrap().mean, 0.0);
        h.remove(&5);
        assert_eq!(radial_expansion(&pairs, &h, 1.0), Err(PostprocessError::MissingHistory(5)));
    }
}
