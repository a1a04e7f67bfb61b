//! Config-driven `f64` simulations, fixture loading and CSV records.

pub mod config;
pub mod csv;
pub mod fixture;
pub mod runner;

pub use config::{load_config, load_config_file, ExperimentConfig, InitialCondition, Mode};
pub use csv::{read_csv, write_csv};
pub use runner::{run, run_from, ultimate_bound, SimulationRecord, DEFAULT_TAIL_FRACTION};
