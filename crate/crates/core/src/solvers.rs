//! Iteration rules and the run loop.
//!
//! * STP: sample `s`, compare `f` at `x`, `x + αs`, `x − αs` and keep the best.
//!   `f(x)` is cached, so an iteration costs two evaluations (three with the
//!   solution-free stepsize).
//! * PSTP: the same comparison along the average of `τ` independent draws.
//! * RGF: an unconditional step along a forward-difference estimate of the
//!   directional derivative.
//! * DDS: opportunistic coordinate search over `±eᵢ` whose stepsize doubles on
//!   success and halves on failure.

use std::fmt;

use crate::distributions::{average_directions, DirectionSampler, SampleContext};
use crate::error::{invalid, Error, Result};
use crate::problems::{EvalCounter, Problem};
use crate::stepsizes::{StepContext, StepsizeSchedule};

/// Default evaluation budget of a run.
pub const DEFAULT_MAX_EVALS: u64 = 100_000;
/// Default RGF smoothing parameter.
pub const RGF_DEFAULT_MU: f64 = 1e-4;

/// Default RGF stepsize `1/(4(n+4))`.
pub fn rgf_default_alpha(dim: usize) -> f64 {
    1.0 / (4.0 * (dim as f64 + 4.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Stp,
    Pstp { tau: usize },
    Rgf { mu: f64, alpha: f64 },
    Dds { alpha0: f64 },
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub sampler: Option<DirectionSampler>,
    pub schedule: Option<StepsizeSchedule>,
}

impl SolverConfig {
    pub fn stp(sampler: DirectionSampler, schedule: StepsizeSchedule) -> Self {
        Self {
            method: Method::Stp,
            sampler: Some(sampler),
            schedule: Some(schedule),
        }
    }

    pub fn pstp(tau: usize, sampler: DirectionSampler, schedule: StepsizeSchedule) -> Self {
        Self {
            method: Method::Pstp { tau },
            sampler: Some(sampler),
            schedule: Some(schedule),
        }
    }

    pub fn rgf(mu: f64, alpha: f64, sampler: DirectionSampler) -> Self {
        Self {
            method: Method::Rgf { mu, alpha },
            sampler: Some(sampler),
            schedule: None,
        }
    }

    pub fn dds(alpha0: f64) -> Self {
        Self {
            method: Method::Dds { alpha0 },
            sampler: None,
            schedule: None,
        }
    }

    fn sampler(&self) -> Result<&DirectionSampler> {
        self.sampler
            .as_ref()
            .ok_or_else(|| Error::Config("method needs a direction sampler".into()))
    }

    fn schedule(&self) -> Result<&StepsizeSchedule> {
        self.schedule
            .as_ref()
            .ok_or_else(|| Error::Config("method needs a stepsize schedule".into()))
    }

    /// Checks the configuration against `problem` without evaluating anything.
    pub fn validate(&self, problem: &Problem) -> Result<()> {
        let config = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        match &self.method {
            Method::Stp | Method::Pstp { .. } => {
                if let Method::Pstp { tau } = self.method {
                    if tau == 0 {
                        return Err(Error::Config("pstp needs tau >= 1".into()));
                    }
                }
                self.schedule()?.validate().map_err(config)?;
            }
            Method::Rgf { mu, alpha } => {
                if !(*mu > 0.0 && *mu < 1.0) {
                    return Err(Error::Config(format!(
                        "rgf mu must lie in (0, 1), got {mu}"
                    )));
                }
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Config(format!(
                        "rgf alpha must be positive, got {alpha}"
                    )));
                }
            }
            Method::Dds { alpha0 } => {
                if !(*alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(Error::Config(format!(
                        "dds alpha0 must be positive, got {alpha0}"
                    )));
                }
            }
        }
        if !matches!(self.method, Method::Dds { .. }) {
            let sampler = self.sampler()?;
            if sampler.dim() != problem.dim() {
                return Err(Error::Config(format!(
                    "sampler dimension {} does not match problem {} of dimension {}",
                    sampler.dim(),
                    problem.name(),
                    problem.dim()
                )));
            }
            if sampler.is_oracle() && !problem.has_gradient() {
                return Err(Error::Config(format!(
                    "{} needs an analytic gradient, which {} does not provide",
                    sampler.name(),
                    problem.name()
                )));
            }
        }
        Ok(())
    }

    /// Objective evaluations charged by one iteration (DDS: the maximum).
    pub fn evals_per_iteration(&self, dim: usize) -> u64 {
        match &self.method {
            Method::Stp | Method::Pstp { .. } => {
                2 + self
                    .schedule
                    .as_ref()
                    .map_or(0, StepsizeSchedule::probes_per_step)
            }
            Method::Rgf { .. } => 2,
            Method::Dds { .. } => 2 * dim as u64,
        }
    }
}

/// Current iterate with its cached objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub x: Vec<f64>,
    pub f_x: f64,
    pub k: u64,
    /// Current DDS stepsize; unused by the other methods.
    pub dds_alpha: f64,
    /// Stepsize used by the step that produced this state.
    pub alpha: f64,
}

impl IterationState {
    /// Evaluates `x0` (one evaluation) and builds the starting state.
    pub fn initial(
        problem: &Problem,
        cfg: &SolverConfig,
        counter: &mut EvalCounter,
    ) -> Result<Self> {
        let x = problem.x0().to_vec();
        let f_x = finite(problem.eval(&x, counter)?)?;
        let dds_alpha = match cfg.method {
            Method::Dds { alpha0 } => alpha0,
            _ => 0.0,
        };
        Ok(Self {
            x,
            f_x,
            k: 0,
            dds_alpha,
            alpha: 0.0,
        })
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Oracle(format!("objective returned {v}")))
    }
}

fn eval_checked(problem: &Problem, x: &[f64], counter: &mut EvalCounter) -> Result<f64> {
    match problem.eval(x, counter) {
        Ok(v) => finite(v),
        Err(Error::InvalidArgument(msg)) => Err(Error::Oracle(msg)),
        Err(e) => Err(e),
    }
}

/// Compares `x`, `x + αs` and `x − αs` (two evaluations) and keeps the best.
/// Exact ties keep `x`, then prefer `x + αs`.
pub fn three_point_step(
    problem: &Problem,
    state: &IterationState,
    s: &[f64],
    alpha: f64,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    let plus: Vec<f64> = state.x.iter().zip(s).map(|(x, d)| x + alpha * d).collect();
    let minus: Vec<f64> = state.x.iter().zip(s).map(|(x, d)| x - alpha * d).collect();
    let f_plus = eval_checked(problem, &plus, counter)?;
    let f_minus = eval_checked(problem, &minus, counter)?;

    let (x, f_x) = if f_minus < state.f_x && f_minus < f_plus {
        (minus, f_minus)
    } else if f_plus < state.f_x {
        (plus, f_plus)
    } else {
        (state.x.clone(), state.f_x)
    };
    Ok(IterationState {
        x,
        f_x,
        k: state.k + 1,
        dds_alpha: state.dds_alpha,
        alpha,
    })
}

fn oracle_gradient(
    problem: &Problem,
    sampler: &DirectionSampler,
    x: &[f64],
) -> Result<Option<Vec<f64>>> {
    if sampler.is_oracle() {
        Ok(Some(problem.grad(x)?))
    } else {
        Ok(None)
    }
}

fn schedule_alpha(
    schedule: &StepsizeSchedule,
    problem: &Problem,
    state: &IterationState,
    s: &[f64],
    counter: &mut EvalCounter,
) -> Result<f64> {
    let mut probe = |y: &[f64]| eval_checked(problem, y, counter);
    let mut ctx = StepContext {
        k: state.k,
        f_x: state.f_x,
        x: &state.x,
        s,
        probe: &mut probe,
    };
    schedule.alpha(&mut ctx)
}

/// One STP iteration.
pub fn stp_step(
    problem: &Problem,
    state: &IterationState,
    cfg: &SolverConfig,
    ctx: &mut SampleContext,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    let sampler = cfg.sampler()?;
    let gradient = oracle_gradient(problem, sampler, &state.x)?;
    let s = sampler.sample(ctx, gradient.as_deref())?;
    let alpha = schedule_alpha(cfg.schedule()?, problem, state, &s, counter)?;
    three_point_step(problem, state, &s, alpha, counter)
}

/// One PSTP iteration: the three-point comparison along `(1/τ) Σ sᵢ`.
pub fn pstp_step(
    problem: &Problem,
    state: &IterationState,
    cfg: &SolverConfig,
    ctx: &mut SampleContext,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    let Method::Pstp { tau } = cfg.method else {
        return Err(invalid("pstp_step called with a non-pstp configuration"));
    };
    let sampler = cfg.sampler()?;
    let gradient = oracle_gradient(problem, sampler, &state.x)?;
    let mut scratch = vec![0.0; problem.dim()];
    let mut s = vec![0.0; problem.dim()];
    average_directions(sampler, ctx, gradient.as_deref(), tau, &mut scratch, &mut s)?;
    let alpha = schedule_alpha(cfg.schedule()?, problem, state, &s, counter)?;
    three_point_step(problem, state, &s, alpha, counter)
}

/// One RGF iteration: `x ← x − α ((f(x + μs) − f(x)) / μ) s`, taken
/// unconditionally. The new point is evaluated for the trace (two evaluations).
pub fn rgf_step(
    problem: &Problem,
    state: &IterationState,
    cfg: &SolverConfig,
    ctx: &mut SampleContext,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    let Method::Rgf { mu, alpha } = cfg.method else {
        return Err(invalid("rgf_step called with a non-rgf configuration"));
    };
    let sampler = cfg.sampler()?;
    let gradient = oracle_gradient(problem, sampler, &state.x)?;
    let s = sampler.sample(ctx, gradient.as_deref())?;
    rgf_update(problem, state, &s, mu, alpha, counter)
}

/// The RGF update along a given direction.
pub fn rgf_update(
    problem: &Problem,
    state: &IterationState,
    s: &[f64],
    mu: f64,
    alpha: f64,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    let shifted: Vec<f64> = state.x.iter().zip(s).map(|(x, d)| x + mu * d).collect();
    let f_shift = eval_checked(problem, &shifted, counter)?;
    let slope = (f_shift - state.f_x) / mu;
    let x: Vec<f64> = state
        .x
        .iter()
        .zip(s)
        .map(|(x, d)| x - alpha * slope * d)
        .collect();
    let f_x = eval_checked(problem, &x, counter)?;
    Ok(IterationState {
        x,
        f_x,
        k: state.k + 1,
        dds_alpha: state.dds_alpha,
        alpha,
    })
}

/// One coordinate-search iteration. Polls `+e₁, −e₁, …, +eₙ, −eₙ` and moves
/// to the first point with strictly smaller `f`.
pub fn dds_step(
    problem: &Problem,
    state: &IterationState,
    cfg: &SolverConfig,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    if !matches!(cfg.method, Method::Dds { .. }) {
        return Err(invalid("dds_step called with a non-dds configuration"));
    }
    let alpha = state.dds_alpha;
    let mut y = state.x.clone();
    for i in 0..problem.dim() {
        for sign in [1.0, -1.0] {
            y[i] = state.x[i] + sign * alpha;
            let f_y = eval_checked(problem, &y, counter)?;
            if f_y < state.f_x {
                return Ok(IterationState {
                    x: y,
                    f_x: f_y,
                    k: state.k + 1,
                    dds_alpha: 2.0 * alpha,
                    alpha,
                });
            }
        }
        y[i] = state.x[i];
    }
    Ok(IterationState {
        x: state.x.clone(),
        f_x: state.f_x,
        k: state.k + 1,
        dds_alpha: alpha / 2.0,
        alpha,
    })
}

/// Dispatches to the step rule of `cfg.method`.
pub fn step(
    problem: &Problem,
    state: &IterationState,
    cfg: &SolverConfig,
    ctx: &mut SampleContext,
    counter: &mut EvalCounter,
) -> Result<IterationState> {
    match cfg.method {
        Method::Stp => stp_step(problem, state, cfg, ctx, counter),
        Method::Pstp { .. } => pstp_step(problem, state, cfg, ctx, counter),
        Method::Rgf { .. } => rgf_step(problem, state, cfg, ctx, counter),
        Method::Dds { .. } => dds_step(problem, state, cfg, counter),
    }
}

/// Stop when `f ≤ f* + ε (f(x0) − f*)` or the budget is spent.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRule {
    pub epsilon: f64,
    pub f_star: Option<f64>,
    pub max_evals: u64,
    /// Stop once `‖∇f(x)‖₂` drops below this value (needs an analytic gradient).
    pub grad_target: Option<f64>,
}

impl StoppingRule {
    pub fn new(epsilon: f64, f_star: Option<f64>) -> Self {
        Self {
            epsilon,
            f_star,
            max_evals: DEFAULT_MAX_EVALS,
            grad_target: None,
        }
    }

    pub fn with_max_evals(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    /// Target objective value given `f(x0)`; `None` when `f*` is unknown.
    pub fn target(&self, f_x0: f64) -> Option<f64> {
        self.f_star.map(|fs| fs + self.epsilon * (f_x0 - fs))
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(g) = self.grad_target {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Config("grad_target must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    TargetReached,
    BudgetExhausted,
    Stationary,
    OracleFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::TargetReached => "target_reached",
            Status::BudgetExhausted => "budget_exhausted",
            Status::Stationary => "stationary",
            Status::OracleFailure => "oracle_failure",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "target_reached" => Status::TargetReached,
            "budget_exhausted" => Status::BudgetExhausted,
            "stationary" => Status::Stationary,
            "oracle_failure" => Status::OracleFailure,
            other => return Err(invalid(format!("unknown status `{other}`"))),
        })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    pub f_x: f64,
    pub evals: u64,
    pub alpha: f64,
}

/// Per-iteration history of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
    pub evals_to_target: Option<u64>,
    pub total_evals: u64,
    /// Final iterate.
    pub x: Vec<f64>,
    /// Oracle failure detail, if any.
    pub message: Option<String>,
}

impl Trace {
    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f_x)
    }

    /// `k,f,evals,alpha` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,f,evals,alpha\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.k,
                crate::fmt_f64(r.f_x),
                r.evals,
                crate::fmt_f64(r.alpha)
            ));
        }
        out
    }

    /// One-row sidecar: `status,evals_to_target,total_evals,iterations`.
    pub fn summary_csv(&self) -> String {
        format!(
            "status,evals_to_target,total_evals,iterations\n{},{},{},{}\n",
            self.status,
            self.evals_to_target
                .map_or_else(|| "NA".to_string(), |e| e.to_string()),
            self.total_evals,
            self.records.last().map_or(0, |r| r.k)
        )
    }
}

fn grad_norm(problem: &Problem, x: &[f64]) -> Result<f64> {
    Ok(problem.grad(x)?.iter().map(|g| g * g).sum::<f64>().sqrt())
}

/// Runs `cfg` on `problem` until the stopping rule fires.
///
/// Configuration problems are reported as errors before any evaluation.
/// Failures during the run end it with [`Status::OracleFailure`] or
/// [`Status::Stationary`] instead.
pub fn run(problem: &Problem, cfg: &SolverConfig, stop: &StoppingRule, seed: u64) -> Result<Trace> {
    cfg.validate(problem)?;
    stop.validate()?;
    if stop.grad_target.is_some() && !problem.has_gradient() {
        return Err(Error::Config(format!(
            "{} has no gradient for grad_target",
            problem.name()
        )));
    }
    let mut ctx = SampleContext::from_seed(seed);
    let mut counter = EvalCounter::new();
    let mut state = IterationState::initial(problem, cfg, &mut counter)?;
    let target = stop.target(state.f_x);
    let reached = |st: &IterationState| -> Result<bool> {
        if target.is_some_and(|t| st.f_x <= t) {
            return Ok(true);
        }
        match stop.grad_target {
            Some(g) => Ok(grad_norm(problem, &st.x)? <= g),
            None => Ok(false),
        }
    };

    let mut records = vec![TraceRecord {
        k: 0,
        f_x: state.f_x,
        evals: counter.count(),
        alpha: 0.0,
    }];
    let mut message = None;
    let status = loop {
        if reached(&state)? {
            break Status::TargetReached;
        }
        if counter.count() >= stop.max_evals {
            break Status::BudgetExhausted;
        }
        match step(problem, &state, cfg, &mut ctx, &mut counter) {
            Ok(next) => {
                state = next;
                records.push(TraceRecord {
                    k: state.k,
                    f_x: state.f_x,
                    evals: counter.count(),
                    alpha: state.alpha,
                });
            }
            Err(Error::Stationary) => break Status::Stationary,
            Err(e @ (Error::Config(_) | Error::Unsupported(_))) => return Err(e),
            Err(e) => {
                message = Some(e.to_string());
                break Status::OracleFailure;
            }
        }
    };
    let evals_to_target = (status == Status::TargetReached).then(|| counter.count());
    Ok(Trace {
        records,
        status,
        evals_to_target,
        total_evals: counter.count(),
        x: state.x,
        message,
    })
}
