//! Scenario runner, file formats and command-line front end for the
//! `photomesh-core` simulator.

pub mod config;
pub mod error;
pub mod export;
pub mod inference;
pub mod run;

pub use config::{parse_scenario, Overrides, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use inference::{run_inference, AccuracyReport};
pub use run::{run_scenario, RunOutcome, ScenarioReport};
