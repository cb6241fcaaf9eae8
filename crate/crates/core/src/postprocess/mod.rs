//! Measurement algorithms applied to node histories exported by an external
//! finite element run, or to bench logs.

pub mod angle;
pub mod expansion;
pub mod hysteresis;
pub mod io;
pub mod schedule;

use thiserror::Error;

pub use angle::{bending_angle, NodeHistory};
pub use expansion::{radial_expansion, select_radial_pairs, ExpansionPoint, PairSelection, RadialPair};
pub use hysteresis::{hysteresis_ratio, AngleSeries, HysteresisResult};
pub use schedule::PressureSchedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostprocessError {
    #[error("invalid pressure schedule: {0}")]
    InvalidSchedule(String),
    #[error("time {t} outside the range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("zero-length reference-to-tip vector")]
    ZeroLengthVector,
    #[error("invalid node history for node {node}: {detail}")]
    InvalidHistory { node: u64, detail: String },
    #[error("no history for node {0}")]
    MissingHistory(u64),
    #[error("only {found} of {needed} stations have a node within tolerance")]
    Coverage { needed: usize, found: usize },
    #[error("mismatched series: {0}")]
    Mismatch(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}
