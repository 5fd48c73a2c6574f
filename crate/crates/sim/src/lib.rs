//! Scenario-driven kinematic simulation of the hexapod installation robot:
//! configuration and scenario files, the tick loop, CSV logs, metrics and
//! cylinder mapping tables.

// Checks are written as `!(a < b)` so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fit;
pub mod log;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod tables;

pub use config::{load_config, save_config, ConfigError, RobotConfig};
pub use metrics::{emit_metrics, Metrics};
pub use scenario::{load_scenario, resolve_scenario, Scenario, ScenarioError};
pub use sim::{run_scenario, RunOutput, SimError};
pub use tables::export_mapping_tables;
