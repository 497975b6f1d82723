//! Sweeps along cone curves, CSV/JSON output and the self-check suites.

pub mod config;
pub mod sweep;
pub mod verify;

pub use config::{QuantityKind, Regime, SweepConfig};
pub use sweep::{csv_string, run_sweep, write_csv, write_outputs, SweepOutput, SweepRow, SweepSummary, COLUMNS};
pub use verify::{verify_all, VerifyLevel, VerifyOptions, VerifyReport};
