//! Scenario configuration, the diagnostic runner and run comparison.

mod compare;
mod config;
mod run;

pub use compare::{compare_runs, Comparison, ComparisonRow};
pub use config::{
    parse_config, parse_config_str, BaseConfig, Budgets, ConfigError, DiagnosticName, Expectations, ScenarioConfig,
    SetExpectation, StabilizerExpectation, Start, Tolerances,
};
pub use run::{default_probes, run_oracle, run_scenario, Counters, Mode, RunOutcome, RunReport, ORACLE_MAX_N, SCHEMA_VERSION};

use thiserror::Error;

use crate::estimate::EstimateError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("oracle runs need N <= {limit}, got {n}")]
    OracleLimit { n: u64, limit: u64 },
    #[error("{path}: {msg}")]
    Report { path: String, msg: String },
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}
