use std::collections::BTreeMap;

use proptest::prelude::*;

use softbend::export::smooth_amplitude;
use softbend::fiberpath::{crossing_count, generate_helix, HelixStyle, WindingSpec};
use softbend::geometry::{build_geometry_a, ActuatorSpec, Chirality, GeometryAParams};
use softbend::materials::MaterialLibrary;
use softbend::mechanics::{Prepared, SegmentModel};
use softbend::postprocess::{bending_angle, select_radial_pairs, NodeHistory, PairSelection, PressureSchedule};

fn spec() -> &'static ActuatorSpec {
    static SPEC: std::sync::OnceLock<ActuatorSpec> = std::sync::OnceLock::new();
    SPEC.get_or_init(|| build_geometry_a(&GeometryAParams::default()).unwrap())
}

/// Brute-force crossing points of a developed polyline: every pair of
/// non-adjacent segments, each unwrapped and tested against copies shifted
/// by one perimeter either way. Returns distinct points away from the path
/// ends and the turnaround.
fn brute_crossings(dev: &[[f64; 2]], perim: f64, span: f64) -> usize {
    let segs: Vec<([f64; 2], [f64; 2])> = dev
        .windows(2)
        .map(|w| {
            let mut ds = w[1][0] - w[0][0];
            ds -= perim * (ds / perim).round();
            (w[0], [w[0][0] + ds, w[1][1]])
        })
        .collect();
    let mut points: Vec<[f64; 2]> = Vec::new();
    for i in 0..segs.len() {
        for j in i + 2..segs.len() {
            for shift in [-perim, 0.0, perim] {
                let (p0, p1) = segs[i];
                let q0 = [segs[j].0[0] + shift, segs[j].0[1]];
                let q1 = [segs[j].1[0] + shift, segs[j].1[1]];
                let r = [p1[0] - p0[0], p1[1] - p0[1]];
                let s = [q1[0] - q0[0], q1[1] - q0[1]];
                let den = r[0] * s[1] - r[1] * s[0];
                if den.abs() < 1e-14 {
                    continue;
                }
                let w = [q0[0] - p0[0], q0[1] - p0[1]];
                let t = (w[0] * s[1] - w[1] * s[0]) / den;
                let u = (w[0] * r[1] - w[1] * r[0]) / den;
                let eps = 1e-9;
                if !(-eps..=1.0 + eps).contains(&t) || !(-eps..=1.0 + eps).contains(&u) {
                    continue;
                }
                let x = [(p0[0] + t * r[0]).rem_euclid(perim), p0[1] + t * r[1]];
                if x[1] < 1e-7 * span || x[1] > span * (1.0 - 1e-7) {
                    continue;
                }
                let seen = points.iter().any(|p| {
                    let ds = (p[0] - x[0]).abs();
                    ds.min(perim - ds) < 1e-6 && (p[1] - x[1]).abs() < 1e-6
                });
                if !seen {
                    points.push(x);
                }
            }
        }
    }
    points.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn double_helix_crossings_match_brute_force(
        turns in 1u32..10,
        spt in 16usize..40,
        phase in 0.0f64..1.0,
        ccw in any::<bool>(),
    ) {
        let mut w = WindingSpec::for_spec(spec(), HelixStyle::Dh, turns);
        w.samples_per_turn = spt;
        w.phase = phase;
        w.chirality = if ccw { Chirality::Ccw } else { Chirality::Cw };
        let path = generate_helix(spec(), &w).unwrap();
        let brute = brute_crossings(&path.developed, path.surface.perimeter(), path.axial_span);
        prop_assert_eq!(brute, 2 * turns as usize - 1);
        prop_assert_eq!(crossing_count(&path), brute);
    }

    #[test]
    fn single_helix_is_monotone_in_z(turns in 1u32..200) {
        let path = generate_helix(spec(), &WindingSpec::for_spec(spec(), HelixStyle::Sh, turns)).unwrap();
        prop_assert!(path.points.windows(2).all(|w| w[1][2] > w[0][2]));
        prop_assert_eq!(crossing_count(&path), 0);
    }
}

proptest! {
    #[test]
    fn bending_angle_invariant_under_translation_and_scale(
        tip in prop::array::uniform3(-50.0f64..50.0),
        reference in prop::array::uniform3(-50.0f64..50.0),
        u in prop::array::uniform3(-20.0f64..20.0),
        shift in prop::array::uniform3(-100.0f64..100.0),
        scale in 0.01f64..100.0,
    ) {
        let v0 = [tip[0] - reference[0], tip[1] - reference[1], tip[2] - reference[2]];
        let v1 = [v0[0] + u[0], v0[1] + u[1], v0[2] + u[2]];
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assume!(norm(v0) > 1e-3 && norm(v1) > 1e-3);
        let angle = |r: [f64; 3], t: [f64; 3], d: [f64; 3]| {
            let h = NodeHistory::new(7, t, vec![(0.0, [0.0; 3]), (1.0, d)]).unwrap();
            bending_angle(r, &h, 1.0).unwrap()
        };
        let base = angle(reference, tip, u);
        let add = |a: [f64; 3]| [a[0] + shift[0], a[1] + shift[1], a[2] + shift[2]];
        let mul = |a: [f64; 3]| [a[0] * scale, a[1] * scale, a[2] * scale];
        prop_assert!((0.0..=180.0).contains(&base));
        prop_assert!((angle(add(reference), add(tip), u) - base).abs() < 1e-6);
        prop_assert!((angle(mul(reference), mul(tip), mul(u)) - base).abs() < 1e-6);
    }

    #[test]
    fn pair_selection_ignores_node_order(
        perm in Just((0..240usize).collect::<Vec<_>>()).prop_shuffle(),
        jitter in prop::collection::vec(-0.2f64..0.2, 240),
    ) {
        let s = spec();
        let nodes: Vec<(u64, [f64; 3])> = (0..240)
            .map(|i| {
                let z = (i / 4) as f64 * 0.45 + jitter[i].abs();
                let (x, y) = match i % 4 {
                    0 => (jitter[i], s.flat_y),
                    1 => (jitter[i], s.outer_radius),
                    2 => (4.0, 5.0 + jitter[i]),
                    _ => (-4.0, 5.0),
                };
                (i as u64 + 1, [x, y, z])
            })
            .collect();
        let shuffled: Vec<_> = perm.iter().map(|&k| nodes[k]).collect();
        let a = select_radial_pairs(&nodes, s, &PairSelection::default());
        let b = select_radial_pairs(&shuffled, s, &PairSelection::default());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn stepped_schedule_rises_then_falls(
        inc in 1.0f64..30.0,
        hold in 0.5f64..10.0,
        p_max in 10.0f64..200.0,
        reverse in any::<bool>(),
    ) {
        let s = PressureSchedule::Stepped { increment: inc, hold, p_max, with_reverse: reverse };
        s.validate().unwrap();
        s.monotone_legs().unwrap();
        let (t0, t1) = s.span();
        let ts: Vec<f64> = (0..=400).map(|i| t0 + (t1 - t0) * (i as f64 / 400.0)).collect();
        let ps: Vec<f64> = ts.iter().map(|&t| s.time_to_pressure(t).unwrap()).collect();
        let peak = ps.iter().cloned().fold(0.0, f64::max);
        prop_assert!(ps.iter().all(|&p| (0.0..=p_max).contains(&p)));
        prop_assert_eq!(peak, p_max);
        let top = ps.iter().position(|&p| p == peak).unwrap();
        prop_assert!(ps[..=top].windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(ps[top..].windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(s.time_to_pressure(t1 + 1.0).is_err());
    }

    #[test]
    fn amplitude_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fa, fb) = (smooth_amplitude(lo).unwrap(), smooth_amplitude(hi).unwrap());
        prop_assert!(fa <= fb);
        prop_assert!((0.0..=1.0).contains(&fa));
        // symmetric about the midpoint
        prop_assert!((smooth_amplitude(1.0 - lo).unwrap() - (1.0 - fa)).abs() < 1e-12);
    }

    #[test]
    fn energy_ignores_stretch_order(l1 in 0.5f64..3.0, l2 in 0.5f64..3.0) {
        let lib = MaterialLibrary::default();
        let l3 = 1.0 / (l1 * l2);
        for name in lib.entries.keys() {
            let m = lib.model(name).unwrap();
            let w = m.strain_energy([l1, l2, l3]).unwrap();
            prop_assert_eq!(w, m.strain_energy([l3, l1, l2]).unwrap());
            prop_assert_eq!(w, m.strain_energy([l2, l3, l1]).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn expansion_decreases_with_turns(n in 5u32..150, extra in 1u32..100, p in 5.0f64..100.0) {
        let lib = MaterialLibrary::default();
        let seg = SegmentModel::default();
        let prep = |turns| {
            Prepared::new(spec(), &[WindingSpec::for_spec(spec(), HelixStyle::Sh, turns)], &lib, &seg).unwrap()
        };
        prop_assert!(prep(n + extra).expansion(p, &seg) < prep(n).expansion(p, &seg));
    }

    #[test]
    fn theta_monotone_on_ramps(turns in 30u32..200, dh in any::<bool>(), p_max in 10.0f64..100.0) {
        let lib = MaterialLibrary::default();
        let seg = SegmentModel::default();
        let style = if dh { HelixStyle::Dh } else { HelixStyle::Sh };
        let prep = Prepared::new(spec(), &[WindingSpec::for_spec(spec(), style, turns)], &lib, &seg).unwrap();
        let ramp: Vec<f64> = (0..=25).map(|i| p_max * i as f64 / 25.0).collect();
        let r = prep.run(&ramp, &seg).unwrap();
        prop_assert_eq!(r.theta[0], 0.0);
        prop_assert!(r.theta.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.theta.iter().all(|&t| t <= 180.0));
        let mut seen = BTreeMap::new();
        for (p, t) in r.pressures.iter().zip(&r.theta) {
            seen.insert(p.to_bits(), *t);
        }
        prop_assert_eq!(seen.len(), ramp.len());
    }
}
