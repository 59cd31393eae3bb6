//! Experiment driver for the nudging simulator: run configs, sweeps,
//! bound reports, self checks, and plot-data export.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;
