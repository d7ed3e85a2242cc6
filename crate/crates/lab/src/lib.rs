//! Batch driver for the blow-up lab: verification suites, single runs,
//! parameter sweeps and their CSV, SVG, dump and manifest artifacts.

pub mod commands;
pub mod config;
pub mod goldens;
pub mod manifest;
pub mod runs;
pub mod suites;
pub mod svg;
