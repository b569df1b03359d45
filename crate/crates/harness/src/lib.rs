//! Experiment harness for the stochastic three points benchmarks: plan
//! parsing, matrix execution with trace files, performance-profile reports,
//! and Monte-Carlo validation of the direction-law constants.
//!
//! The `stp` binary wraps these pieces; see [`cli`].

pub mod cli;
pub mod error;
pub mod matrix;
pub mod methods;
pub mod plan;
pub mod records;
pub mod report;
pub mod validate;

pub use error::{HarnessError, Result};
pub use matrix::{run_matrix, run_seed, ExecOptions, MatrixOutput};
pub use methods::MethodSpec;
pub use plan::{ExperimentPlan, PlanInput};
pub use records::{read_records, RecordRow, RunOutcome};
pub use report::{build_report, report};
pub use validate::{validate_assumptions, ValidationReport};
