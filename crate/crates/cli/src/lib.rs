//! Command-line harness: instance generation, evaluation sweeps, training,
//! schedule validation, reporting and plotting.

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod plot;
pub mod records;
pub mod report;

pub use error::CliError;
pub use evaluate::{evaluate, EvalPlan, Outcome, SchedulerKind};
pub use records::{load_instances, RunRecord, RESULTS_HEADER};
pub use report::{build_report, Report};
