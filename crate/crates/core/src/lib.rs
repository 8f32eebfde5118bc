//! Discrete-event simulator for a star-topology sensor network whose
//! receiver harvests solar and wind energy and adapts its duty cycle to stay
//! energy neutral (the HENO-MAC protocol), with simplified single-source
//! baselines for comparison.
//!
//! The crate is organized along the pipeline:
//!
//! - [`trace`]: environmental time series and harvested-energy conversion
//! - [`energy`]: battery ledger and radio consumption accounting
//! - [`policy`]: duty-cycle controllers
//! - [`protocol`]: frame formats, request window, packet queue
//! - [`sim`]: the deterministic event engine and metrics
//! - [`config`], [`synth`], [`report`], [`experiment`]: run configuration,
//!   synthetic traces, CSV reports and the batch runner

pub mod config;
pub mod energy;
pub mod experiment;
pub mod policy;
pub mod protocol;
pub mod report;
pub mod sim;
pub mod synth;
pub mod trace;

pub use config::{load_config, ConfigError, SimConfig};
pub use experiment::{run_experiment, ExperimentError, ExperimentOptions};
pub use report::RunReport;
pub use sim::{run, run_with_log, summarize, Metrics, RunSummary, SimError};
