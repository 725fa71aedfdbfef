//! Scenario files, run orchestration, event logs and parameter sweeps on top
//! of `oppsim-core`.

pub mod config;
pub mod eventlog;
pub mod runner;
pub mod sweep;

pub use config::{parse_scenario, serialize_scenario, ConfigError, MobilitySpec, Parsed, Scenario};
pub use eventlog::{read_event_log, write_event_log, EventLogError};
pub use runner::{run_scenario, simulate, RunError, RunOutput};
pub use sweep::{sweep, Axis, SweepError};
