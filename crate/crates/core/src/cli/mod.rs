//! Command-line front end: configuration, experiment presets and output files.

pub mod config;
pub mod output;
pub mod presets;

pub use config::{Preset, RunConfig};
pub use presets::{diagnose, run_scan, run_sweep, scenario, Scenario};
