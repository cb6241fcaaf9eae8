use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn softbend(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softbend"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("SOFTBEND_OUT")
        .output()
        .expect("run softbend")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).expect("manifest")).expect("json")
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_softbend")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8_lossy(&o.stdout).to_string() + &String::from_utf8_lossy(&o.stderr);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn unknown_config_section_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[geometry]\nl = 30\n[nonsense]\nx = 1\n").unwrap();
    let out = dir.path().join("out");
    let o = softbend(&out, &["-c", cfg.to_str().unwrap(), "design"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonsense"));
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 2);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 0);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn bad_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[model]\nn_segments = many\n").unwrap();
    let o = softbend(dir.path(), &["-c", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_segments"));
}

#[test]
fn design_manifest_hashes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = softbend(dir.path(), &["design"]);
    assert!(o.status.success());
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for f in outputs {
        let bytes = std::fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        let hex = Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        assert_eq!(f["sha256"], hex);
    }
    let spec = std::fs::read_to_string(dir.path().join("spec.json")).unwrap();
    assert!(spec.contains("\"schema_version\""));
}

#[test]
fn unstable_simulation_keeps_partial_results_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = softbend(dir.path(), &["simulate", "--style", "SH", "--turns", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("instability"));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "failed");
    assert_eq!(m["exit_code"], 1);
    let csv = std::fs::read_to_string(dir.path().join("result.csv")).unwrap();
    assert!(csv.lines().count() > 2);
}

#[test]
fn sweep_writes_one_csv_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let o = softbend(dir.path(), &["sweep"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for style in ["SH", "DH"] {
        for turns in [9, 18, 30, 50, 100] {
            assert!(dir.path().join(format!("{style}{turns}.csv")).exists());
        }
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("turns,SH_theta_deg"));
    assert!(lines[3].starts_with("30,90.00,100.0,ok"), "{}", lines[3]);
    assert!(lines[1].contains("unstable"));
}

#[test]
fn calibrated_model_feeds_back_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("cal");
    assert!(softbend(&cal, &["calibrate", "--theta", "SH30@100=90"]).status.success());
    let ranking = std::fs::read_to_string(cal.join("ranking.csv")).unwrap();
    assert!(!ranking.contains("DH50"));
    let sim = dir.path().join("sim");
    let o =
        softbend(&sim, &["-c", cal.join("model.ini").to_str().unwrap(), "simulate", "--style", "SH", "--turns", "30"]);
    assert!(o.status.success());
    let last = std::fs::read_to_string(sim.join("result.csv")).unwrap().lines().last().unwrap().to_string();
    let theta: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((theta - 90.0).abs() < 1e-6, "{last}");
    assert_eq!(manifest(&sim)["inputs"].as_array().unwrap().len(), 1);
}

/// Constant-curvature fixture: the tip node at the flat-side tip edge bends
/// through an arc angle proportional to time, reaching 180 degrees at t = 1.
fn arc_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let (flat_y, crown_y, l, chamber) = (2.0, 9.0, 37.5, 26.5);
    let mut nodes = String::from("node_id,x0,y0,z0\n");
    let mut disp = String::from("node_id,t,ux_mm,uy_mm,uz_mm\n");
    writeln!(nodes, "1,0,{flat_y},{l}").unwrap();
    for i in 1..=10 {
        let t = i as f64 / 10.0;
        let alpha = std::f64::consts::PI * t;
        let r = l / alpha;
        writeln!(disp, "1,{t},{},0,{}", r * (1.0 - alpha.cos()), r * alpha.sin() - l).unwrap();
    }
    for k in 0..12 {
        let z = (k as f64 * 2.5).min(chamber);
        let (f, c) = (100 + 2 * k, 101 + 2 * k);
        writeln!(nodes, "{f},0,{flat_y},{z}\n{c},0,{crown_y},{z}").unwrap();
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            writeln!(disp, "{f},{t},0,0,0\n{c},{t},0,{},0", 0.2 * t).unwrap();
        }
    }
    let (np, dp) = (dir.join("nodes.csv"), dir.join("disp.csv"));
    std::fs::write(&np, nodes).unwrap();
    std::fs::write(&dp, disp).unwrap();
    (np, dp)
}

#[test]
fn analyze_recovers_half_arc_angle_and_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let (np, dp) = arc_fixture(dir.path());
    let out = dir.path().join("out");
    let o = softbend(&out, &["analyze", "--nodes", np.to_str().unwrap(), "--displacements", dp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let angles = std::fs::read_to_string(out.join("angles.csv")).unwrap();
    assert!(angles.lines().any(|l| l == "1.000000,100.000000,90.000000"), "{angles}");
    assert!(angles.lines().any(|l| l == "0.500000,50.000000,45.000000"), "{angles}");
    let exp = std::fs::read_to_string(out.join("expansion.csv")).unwrap();
    assert!(exp.lines().last().unwrap().starts_with("1.000000,100.000000,0.200000,"));
    assert_eq!(std::fs::read_to_string(out.join("pairs.csv")).unwrap().lines().count(), 13);
    let m = manifest(&out);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn analyze_bench_log_hysteresis() {
    let dir = tempfile::tempdir().unwrap();
    let mut log = String::from("pressure_kPa,theta_deg,timestamp\n");
    let mut ts = 0;
    for p in (0..=100).step_by(10) {
        writeln!(log, "{p},{},{ts}", 0.9 * p as f64).unwrap();
        ts += 5;
    }
    for p in (0..100).step_by(10).rev() {
        writeln!(log, "{p},{},{ts}", 0.9 * p as f64 + if p > 0 { 4.5 } else { 0.0 }).unwrap();
        ts += 5;
    }
    let lp = dir.path().join("bench.csv");
    std::fs::write(&lp, log).unwrap();
    let out = dir.path().join("out");
    let o = softbend(&out, &["analyze", "--bench-log", lp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert!((a["hysteresis_ratio_pct"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!(out.join("hysteresis.svg").exists());
}

#[test]
fn export_deck_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let o = softbend(dir.path(), &["export-deck", "--style", "DH", "--turns", "30"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("actuator.deck")).unwrap();
    let deck = softbend::export::FemDeck::parse(&text).unwrap();
    assert_eq!(deck.serialize(), text);
}

#[test]
fn workspace_corridor_check() {
    let dir = tempfile::tempdir().unwrap();
    let fits = |extra: &[&str]| {
        let mut args = vec!["workspace", "--device", "--style", "DH", "--turns", "30"];
        args.extend_from_slice(extra);
        assert!(softbend(dir.path(), &args).status.success());
        let w: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("workspace.json")).unwrap()).unwrap();
        w["fits_corridor"].as_bool().unwrap()
    };
    // The bent tip leaves the straight 9 mm envelope but not a 20 mm one.
    assert!(!fits(&[]));
    assert!(fits(&["--corridor-radius", "20"]));
    let o = softbend(dir.path(), &["workspace", "--corridor-radius", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}
