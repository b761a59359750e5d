//! Seeded Monte-Carlo BER simulation for the `rkb-core` detectors.
//!
//! [`parse_config`] reads a scenario, [`run_scenario`] sweeps every
//! (detector, SNR) point and [`write_csv`] / [`emit_plot_data`] serialize
//! the records.

pub mod config;
pub mod engine;
pub mod output;
pub mod receiver;

pub use config::{parse_config, parse_detectors, parse_snr_grid, ConfigError, DetectorKind, ScenarioConfig};
pub use engine::{run_scenario, run_scenario_detailed, BerRecord, PointSummary, RunError};
pub use output::{emit_plot_data, read_csv, write_csv, CSV_HEADER};
