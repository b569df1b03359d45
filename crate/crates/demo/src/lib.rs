//! Browser demo of stochastic three points search, compiled to WebAssembly.
//!
//! Three operations back the page in `www/`:
//!
//! - [`trajectory`] and [`contour_grid`]: the iterates of a method on a 2-D
//!   test function, drawn over its contour map;
//! - [`convergence`]: relative optimality gap against evaluations on the
//!   chain quadratic, for racing the methods against each other;
//! - [`mu_curve`]: the exact sphere constant `μ`, its asymptotic form, and a
//!   Monte-Carlo estimate, for a range of dimensions.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! each function. Errors surface in JavaScript as thrown strings.

use stp_core::distributions::sphere_mu_asymptotic;
use stp_core::problems::{beale, extended_rosenbrock, spectral_quadratic};
use stp_core::solvers::{rgf_default_alpha, step, RGF_DEFAULT_MU};
use stp_core::stepsizes::DEFAULT_SOLUTION_FREE_T;
use stp_core::{
    chain_quadratic, run, sphere_mu, DirectionSampler, EvalCounter, IterationState, Problem,
    SampleContext, SolverConfig, StepsizeSchedule, StoppingRule,
};
use wasm_bindgen::prelude::*;

/// 2-D functions offered by the trajectory view.
pub const DEMO_PROBLEMS: [&str; 3] = ["rosenbrock", "beale", "skewed_quadratic"];

/// Methods offered by both solver views.
pub const DEMO_METHODS: [&str; 4] = ["stp", "pstp", "rgf", "dds"];

/// Directions averaged per PSTP step.
const PSTP_TAU: usize = 4;

/// Caps on work per call, so a slider cannot freeze the page.
const MAX_EVALS_CAP: u32 = 200_000;
const MAX_POINTS: usize = 4_000;

fn demo_problem(name: &str) -> Result<Problem, String> {
    let p = match name {
        "rosenbrock" => extended_rosenbrock(2),
        "beale" => Ok(beale()),
        "skewed_quadratic" => {
            spectral_quadratic(2, 1.0, 25.0, 3).and_then(|p| p.with_start(vec![-2.5, 3.0]))
        }
        other => {
            return Err(format!(
                "unknown problem `{other}` (expected {})",
                DEMO_PROBLEMS.join(", ")
            ))
        }
    };
    p.map_err(|e| e.to_string())
}

/// Plot window `[xmin, xmax, ymin, ymax]` for a demo problem.
fn view(name: &str) -> [f64; 4] {
    match name {
        "rosenbrock" => [-2.0, 2.0, -1.0, 3.0],
        "beale" => [-1.0, 4.5, -1.5, 2.0],
        _ => [-3.5, 3.5, -2.0, 4.0],
    }
}

fn method_config(
    method: &str,
    dim: usize,
    alpha0: f64,
    lipschitz: Option<f64>,
) -> Result<SolverConfig, String> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(format!("alpha0 must be positive, got {alpha0}"));
    }
    let sphere = || DirectionSampler::sphere(dim).map_err(|e| e.to_string());
    // With a known Lipschitz constant the STP variants use the solution-free
    // stepsize; otherwise the decreasing `α₀/√(k+1)` rule.
    let schedule = match lipschitz {
        Some(l) => StepsizeSchedule::SolutionFree {
            lipschitz: l / alpha0,
            t: DEFAULT_SOLUTION_FREE_T,
        },
        None => StepsizeSchedule::InvSqrt { alpha0 },
    };
    Ok(match method {
        "stp" => SolverConfig::stp(sphere()?, schedule),
        "pstp" => SolverConfig::pstp(PSTP_TAU, sphere()?, schedule),
        "rgf" => SolverConfig::rgf(RGF_DEFAULT_MU, alpha0 * rgf_default_alpha(dim), sphere()?),
        "dds" => SolverConfig::dds(alpha0),
        other => {
            return Err(format!(
                "unknown method `{other}` (expected {})",
                DEMO_METHODS.join(", ")
            ))
        }
    })
}

/// The default view of a 2-D problem: `[xmin, xmax, ymin, ymax, x0, y0, x*, y*]`,
/// with `NaN` for an unknown minimizer.
#[wasm_bindgen]
pub fn problem_view(problem: &str) -> Result<Vec<f64>, String> {
    let p = demo_problem(problem)?;
    let mut out = view(problem).to_vec();
    out.extend_from_slice(p.x0());
    match p.x_star() {
        Some(x) => out.extend_from_slice(x),
        None => out.extend_from_slice(&[f64::NAN, f64::NAN]),
    }
    Ok(out)
}

/// Objective values on a `res × res` grid over `[xmin, xmax] × [ymin, ymax]`,
/// row-major with `y` increasing by row.
#[wasm_bindgen]
pub fn contour_grid(
    problem: &str,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    res: u32,
) -> Result<Vec<f64>, String> {
    let p = demo_problem(problem)?;
    if !(2..=512).contains(&res) {
        return Err(format!("grid resolution must lie in 2..=512, got {res}"));
    }
    if !(xmax > xmin && ymax > ymin) {
        return Err("empty plot window".into());
    }
    let r = res as usize;
    let mut counter = EvalCounter::new();
    let mut out = Vec::with_capacity(r * r);
    for j in 0..r {
        let y = ymin + (ymax - ymin) * j as f64 / (r - 1) as f64;
        for i in 0..r {
            let x = xmin + (xmax - xmin) * i as f64 / (r - 1) as f64;
            out.push(p.eval(&[x, y], &mut counter).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Iterates of `method` on a 2-D problem from its standard start, as
/// `[x, y, f, evals]` quadruples (iteration 0 first). Stops at `max_evals`
/// evaluations or when the method fails (e.g. RGF diverging).
#[wasm_bindgen]
pub fn trajectory(
    problem: &str,
    method: &str,
    alpha0: f64,
    seed: u32,
    max_evals: u32,
) -> Result<Vec<f64>, String> {
    let p = demo_problem(problem)?;
    let cfg = method_config(method, p.dim(), alpha0, None)?;
    cfg.validate(&p).map_err(|e| e.to_string())?;
    let budget = u64::from(max_evals.min(MAX_EVALS_CAP));
    let mut ctx = SampleContext::from_seed(u64::from(seed));
    let mut counter = EvalCounter::new();
    let mut state = IterationState::initial(&p, &cfg, &mut counter).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let mut push = |s: &IterationState, evals: u64| {
        out.extend_from_slice(&[s.x[0], s.x[1], s.f_x, evals as f64]);
    };
    push(&state, counter.count());
    while counter.count() < budget {
        match step(&p, &state, &cfg, &mut ctx, &mut counter) {
            Ok(next) => state = next,
            Err(_) => break,
        }
        push(&state, counter.count());
    }
    Ok(thin(out, 4))
}

/// Relative gap `(f − f*)/(f(x₀) − f*)` against evaluations for `method` on
/// the `n`-dimensional chain quadratic, as `[evals, gap]` pairs. STP and
/// PSTP use the solution-free stepsize with the known Lipschitz constant
/// scaled by `1/alpha0`.
#[wasm_bindgen]
pub fn convergence(
    method: &str,
    n: u32,
    alpha0: f64,
    seed: u32,
    max_evals: u32,
) -> Result<Vec<f64>, String> {
    if !(2..=500).contains(&n) {
        return Err(format!("dimension must lie in 2..=500, got {n}"));
    }
    let p = chain_quadratic(n as usize).map_err(|e| e.to_string())?;
    let f_star = p.f_star().expect("chain quadratic has a known minimum");
    let cfg = method_config(method, p.dim(), alpha0, p.lipschitz())?;
    let stop = StoppingRule::new(1e-8, Some(f_star))
        .with_max_evals(u64::from(max_evals.min(MAX_EVALS_CAP)));
    let trace = run(&p, &cfg, &stop, u64::from(seed)).map_err(|e| e.to_string())?;
    let f0 = trace.records[0].f_x;
    let mut out = Vec::with_capacity(2 * trace.records.len());
    for r in &trace.records {
        out.push(r.evals as f64);
        out.push(((r.f_x - f_star) / (f0 - f_star)).max(0.0));
    }
    Ok(thin(out, 2))
}

/// For `n = 2..=max_n`: `[n, exact μ, asymptotic μ, Monte-Carlo μ, stderr]`,
/// where the estimate of `E|⟨e₁, s⟩|` uses `samples` sphere directions.
#[wasm_bindgen]
pub fn mu_curve(max_n: u32, samples: u32, seed: u32) -> Result<Vec<f64>, String> {
    if !(2..=1000).contains(&max_n) {
        return Err(format!("max_n must lie in 2..=1000, got {max_n}"));
    }
    if !(2..=1_000_000).contains(&samples) {
        return Err(format!("samples must lie in 2..=1000000, got {samples}"));
    }
    let mut ctx = SampleContext::from_seed(u64::from(seed));
    let mut out = Vec::new();
    for n in 2..=max_n as usize {
        let sampler = DirectionSampler::sphere(n).map_err(|e| e.to_string())?;
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let est = sampler
            .mc_expected_abs_inner(&e1, samples as usize, &mut ctx)
            .map_err(|e| e.to_string())?;
        out.extend_from_slice(&[
            n as f64,
            sphere_mu(n),
            sphere_mu_asymptotic(n),
            est.mean,
            est.stderr,
        ]);
    }
    Ok(out)
}

/// Keeps at most `MAX_POINTS` records of width `stride`, always including
/// the first and the last.
fn thin(data: Vec<f64>, stride: usize) -> Vec<f64> {
    let rows = data.len() / stride;
    if rows <= MAX_POINTS {
        return data;
    }
    let every = rows.div_ceil(MAX_POINTS);
    let mut out = Vec::with_capacity((MAX_POINTS + 1) * stride);
    for r in (0..rows).filter(|r| r % every == 0 || *r == rows - 1) {
        out.extend_from_slice(&data[r * stride..(r + 1) * stride]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectories_are_monotone_for_stp_and_dds() {
        for problem in DEMO_PROBLEMS {
            for method in ["stp", "pstp", "dds"] {
                let t = trajectory(problem, method, 1.0, 7, 2000).unwrap();
                assert_eq!(t.len() % 4, 0);
                let f: Vec<f64> = t.chunks(4).map(|c| c[2]).collect();
                assert!(f.windows(2).all(|w| w[1] <= w[0]), "{problem}/{method}");
                assert!(
                    f.last().unwrap() < &f[0],
                    "{problem}/{method} made no progress"
                );
            }
        }
    }

    #[test]
    fn trajectory_starts_at_the_problem_start() {
        let v = problem_view("rosenbrock").unwrap();
        let t = trajectory("rosenbrock", "stp", 1.0, 1, 100).unwrap();
        assert_eq!(&t[..2], &v[4..6]);
        assert_eq!(t[3], 1.0);
    }

    #[test]
    fn contour_grid_matches_direct_evaluation() {
        let g = contour_grid("rosenbrock", -2.0, 2.0, -1.0, 3.0, 5).unwrap();
        assert_eq!(g.len(), 25);
        // Corner (x = 2, y = 3): 100(3 − 4)² + (1 − 2)² = 101.
        assert!((g[24] - 101.0).abs() < 1e-12);
        // Centre (x = 0, y = 1): 100 + 1.
        assert!((g[12] - 101.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_reaches_small_gaps_on_the_chain_quadratic() {
        for method in DEMO_METHODS {
            let c = convergence(method, 10, 1.0, 3, 20_000).unwrap();
            assert_eq!(c[1], 1.0);
            let last_gap = c[c.len() - 1];
            assert!(last_gap < 0.5, "{method}: {last_gap}");
        }
    }

    #[test]
    fn mu_curve_tracks_the_closed_form() {
        let rows = mu_curve(12, 20_000, 5).unwrap();
        assert_eq!(rows.len(), 11 * 5);
        for r in rows.chunks(5) {
            assert!((r[3] - r[1]).abs() <= 4.0 * r[4], "n={}", r[0]);
        }
        assert!((rows[1] - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(trajectory("cube", "stp", 1.0, 0, 10).is_err());
        assert!(trajectory("beale", "newton", 1.0, 0, 10).is_err());
        assert!(trajectory("beale", "stp", -1.0, 0, 10).is_err());
        assert!(contour_grid("beale", 0.0, 0.0, 0.0, 1.0, 10).is_err());
        assert!(mu_curve(1, 100, 0).is_err());
        assert!(convergence("stp", 1, 1.0, 0, 10).is_err());
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let data: Vec<f64> = (0..10_000).map(f64::from).collect();
        let t = thin(data, 2);
        assert!(t.len() / 2 <= MAX_POINTS + 1);
        assert_eq!(&t[..2], &[0.0, 1.0]);
        assert_eq!(&t[t.len() - 2..], &[9998.0, 9999.0]);
    }
}
