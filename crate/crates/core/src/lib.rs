//! Design and analysis workbench for miniature fibre-reinforced soft
//! pneumatic bending actuators.
//!
//! Units throughout: millimetres, megapascals for stresses and material
//! coefficients, kilopascals for applied pressures, degrees for reported
//! angles.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod export;
pub mod fiberpath;
pub mod geometry;
pub mod materials;
pub mod mechanics;
pub mod plot;
pub mod postprocess;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
