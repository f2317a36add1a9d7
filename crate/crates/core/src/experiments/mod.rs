//! Configured scenario runs: JSON in, CSV and a plain-text report out.

pub mod config;
pub mod emit;
pub mod scenarios;

pub use config::{emit_config, load_config, parse_config, ConfigError, ExperimentConfig, Scenario};
pub use emit::{emit, format_value, EmitError, Emitted};
pub use scenarios::{run_scenario, AssertionOutcome, Row, RunError, ScenarioResult};
