//! Stochastic three points (STP) direct search and the machinery around it:
//! smooth test problems with evaluation counting, direction laws with their
//! constants, stepsize schedules, the STP/PSTP/RGF/DDS iteration rules, and
//! Dolan–Moré performance profiles.
//!
//! ```
//! use stp_core::{chain_quadratic, run, DirectionSampler, SolverConfig, StepsizeSchedule, StoppingRule};
//!
//! let problem = chain_quadratic(10).unwrap();
//! let cfg = SolverConfig::stp(
//!     DirectionSampler::sphere(10).unwrap(),
//!     StepsizeSchedule::InvSqrt { alpha0: 1.0 },
//! );
//! let trace = run(&problem, &cfg, &StoppingRule::new(1e-1, problem.f_star()), 42).unwrap();
//! assert!(trace.final_value() < 0.0);
//! ```

pub mod distributions;
pub mod error;
pub mod problems;
pub mod profiles;
pub mod solvers;
pub mod stats;
pub mod stepsizes;

pub use distributions::{
    random_orthonormal_basis, sphere_mu, DirectionLaw, DirectionSampler, SampleContext,
};
pub use error::{Error, Result};
pub use problems::{
    chain_quadratic, problem_by_name, suite_load, ConvexityClass, EvalCounter, Problem,
};
pub use profiles::{performance_ratios, profile_curve, ProfileCurve, RatioTable, RunRecord};
pub use solvers::{
    dds_step, pstp_step, rgf_step, run, stp_step, three_point_step, IterationState, Method,
    SolverConfig, Status, StoppingRule, Trace, TraceRecord,
};
pub use stats::{Estimate, MeanAccumulator};
pub use stepsizes::{StepContext, StepsizeSchedule};

/// Locale-independent float formatting with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
