//! Configuration-driven scans over the interaction strength and a noise
//! axis, with zero-crossing and region-boundary extraction, Monte-Carlo
//! fit checks and reproducible CSV/JSON output.

pub mod analytic;
pub mod cache;
pub mod config;
pub mod error;
pub mod mc;
pub mod output;
pub mod scan;

pub use config::ScanSpec;
pub use error::CliError;
pub use scan::{extract_region_boundary, find_zero_crossing, run_scan, Column, ScanRow, Scanner};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "BELLFRINGE_THREADS";
