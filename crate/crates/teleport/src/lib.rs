//! Standard-library side of the teleportation simulator: the grid oracle
//! that certifies the analytic wavepackets, run configuration, the study
//! commands and the `teleport` command line.

// `!(x > 0.0)` is how NaN gets rejected alongside the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod oracle;

pub use teleport_core;
