//! CSV ingestion.
//!
//! Node displacements: `node_id,t,ux_mm,uy_mm,uz_mm`, one row per node and
//! time. Initial coordinates come from a sidecar `node_id,x0,y0,z0`. Bench
//! logs are `pressure_kPa,theta_deg,timestamp`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{AngleSeries, NodeHistory, PostprocessError};

#[derive(Debug, Deserialize)]
struct DisplacementRow {
    node_id: u64,
    t: f64,
    ux_mm: f64,
    uy_mm: f64,
    uz_mm: f64,
}

#[derive(Debug, Deserialize)]
struct NodeRow {
    node_id: u64,
    x0: f64,
    y0: f64,
    z0: f64,
}

#[derive(Debug, Deserialize)]
struct BenchRow {
    #[serde(rename = "pressure_kPa")]
    pressure_kpa: f64,
    theta_deg: f64,
    timestamp: f64,
}

fn io_err(path: &str, e: impl std::fmt::Display) -> PostprocessError {
    PostprocessError::Io { path: path.into(), detail: e.to_string() }
}

fn rows<T: for<'de> Deserialize<'de>, R: Read>(src: R, label: &str) -> Result<Vec<T>, PostprocessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(src);
    rdr.deserialize().map(|r| r.map_err(|e| io_err(label, e))).collect()
}

fn open(path: &Path) -> Result<std::fs::File, PostprocessError> {
    std::fs::File::open(path).map_err(|e| io_err(&path.display().to_string(), e))
}

/// Node id and initial coordinates, in id order.
pub fn parse_nodes<R: Read>(src: R, label: &str) -> Result<Vec<(u64, [f64; 3])>, PostprocessError> {
    let mut out: BTreeMap<u64, [f64; 3]> = BTreeMap::new();
    for r in rows::<NodeRow, _>(src, label)? {
        if out.insert(r.node_id, [r.x0, r.y0, r.z0]).is_some() {
            return Err(io_err(label, format!("node {} listed twice", r.node_id)));
        }
    }
    if out.is_empty() {
        return Err(PostprocessError::Empty(label.into()));
    }
    Ok(out.into_iter().collect())
}

/// Histories keyed by node id. Every displaced node needs a sidecar entry;
/// rows may arrive in any order.
pub fn parse_histories<R: Read>(
    displacements: R,
    nodes: &[(u64, [f64; 3])],
    label: &str,
) -> Result<BTreeMap<u64, NodeHistory>, PostprocessError> {
    let initial: BTreeMap<u64, [f64; 3]> = nodes.iter().copied().collect();
    let mut samples: BTreeMap<u64, Vec<(f64, [f64; 3])>> = BTreeMap::new();
    for r in rows::<DisplacementRow, _>(displacements, label)? {
        samples.entry(r.node_id).or_default().push((r.t, [r.ux_mm, r.uy_mm, r.uz_mm]));
    }
    let mut out = BTreeMap::new();
    for (id, mut s) in samples {
        let x0 = *initial.get(&id).ok_or_else(|| io_err(label, format!("node {id} has no initial coordinates")))?;
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.insert(id, NodeHistory::new(id, x0, s)?);
    }
    if out.is_empty() {
        return Err(PostprocessError::Empty(label.into()));
    }
    Ok(out)
}

pub fn read_nodes(path: &Path) -> Result<Vec<(u64, [f64; 3])>, PostprocessError> {
    parse_nodes(open(path)?, &path.display().to_string())
}

pub fn read_histories(path: &Path, nodes: &[(u64, [f64; 3])]) -> Result<BTreeMap<u64, NodeHistory>, PostprocessError> {
    parse_histories(open(path)?, nodes, &path.display().to_string())
}

/// Splits a bench log at its peak pressure into inflation and deflation
/// legs, both of which contain the peak hold. Repeated readings at one pressure within a leg are averaged.
pub fn parse_bench_log<R: Read>(src: R, label: &str) -> Result<(AngleSeries, AngleSeries), PostprocessError> {
    let mut log = rows::<BenchRow, _>(src, label)?;
    if log.is_empty() {
        return Err(PostprocessError::Empty(label.into()));
    }
    log.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let peak =
        log.iter().enumerate().fold(0, |best, (i, r)| if r.pressure_kpa > log[best].pressure_kpa { i } else { best });
    let top = log[peak].pressure_kpa;
    let hold_end = peak + log[peak..].iter().take_while(|r| r.pressure_kpa == top).count();
    Ok((average(&log[..hold_end]), average(&log[peak..])))
}

fn average(rows: &[BenchRow]) -> AngleSeries {
    let mut levels: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        match levels.last_mut() {
            Some(l) if l.0 == r.pressure_kpa => {
                l.1 += r.theta_deg;
                l.2 += 1;
            }
            _ => levels.push((r.pressure_kpa, r.theta_deg, 1)),
        }
    }
    AngleSeries {
        pressures: levels.iter().map(|l| l.0).collect(),
        theta: levels.iter().map(|l| l.1 / l.2 as f64).collect(),
    }
}

pub fn read_bench_log(path: &Path) -> Result<(AngleSeries, AngleSeries), PostprocessError> {
    parse_bench_log(open(path)?, &path.display().to_string())
}
