//! Scenario runner for no-slip billiards and rolling in cylinders.
//!
//! A scenario is a JSON document ([`ScenarioConfig`]); [`run_scenario`]
//! validates it, runs it and writes CSV files plus `summary.json`.

pub mod config;
pub mod plan;
pub mod run;
pub mod timeseries;

use thiserror::Error;

pub use config::{Geometry, Initial, Physics, Run, Scenario, ScenarioConfig};
pub use plan::{validate, Job, Plan};
pub use run::{run_scenario, Summary, COLLISIONS_HEADER, PORTRAIT_HEADER, ROLLING_HEADER};
pub use timeseries::{emit_timeseries, sample_flights, Flight};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] noslip_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.into())
    }
}

impl CliError {
    /// 2 for a bad config, 3 for a numerical failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}
