//! Monte-Carlo checks of the direction-law constants and of direction
//! averaging, reported as a table.

use stp_core::distributions::sphere_mu_asymptotic;
use stp_core::{fmt_f64, random_orthonormal_basis, DirectionSampler, Estimate, SampleContext};

use crate::error::{HarnessError, Result};

/// Laws accepted by [`validate_assumptions`].
pub const VALIDATION_LAWS: [&str; 5] = [
    "sphere",
    "gaussian",
    "coord_uniform",
    "coord_weighted",
    "ortho_basis",
];

/// Averaging sizes for the direction-averaging check.
pub const AVERAGING_TAUS: [usize; 2] = [4, 16];

/// Deviations within this many standard errors pass.
const Z: f64 = 4.0;

/// One (law, dimension) row.
#[derive(Debug, Clone, PartialEq)]
pub struct LawRow {
    pub law: String,
    pub n: usize,
    pub mu_theory: f64,
    /// `1/√(2πn)`, reported next to the exact constant for sphere rows.
    pub mu_asymptotic: Option<f64>,
    pub mu: Estimate,
    pub gamma: Estimate,
    pub passed: bool,
}

/// `E‖(1/τ) Σ sᵢ‖² = 1/τ` for independent sphere directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingRow {
    pub n: usize,
    pub tau: usize,
    pub expected: f64,
    pub estimate: Estimate,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub laws: Vec<LawRow>,
    pub averaging: Vec<AveragingRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(|r| r.passed) && self.averaging.iter().all(|r| r.passed)
    }

    /// Fixed-width text table.
    pub fn to_text(&self) -> String {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut out = format!(
            "{:<14} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>6}\n",
            "law", "n", "mu theory", "mu asympt", "mu MC", "stderr", "gamma MC", "check"
        );
        for r in &self.laws {
            out.push_str(&format!(
                "{:<14} {:>5} {:>10.6} {:>10} {:>10.6} {:>10.2e} {:>10.6} {:>6}\n",
                r.law,
                r.n,
                r.mu_theory,
                r.mu_asymptotic
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.6}")),
                r.mu.mean,
                r.mu.stderr,
                r.gamma.mean,
                verdict(r.passed)
            ));
        }
        out.push_str(&format!(
            "\n{:<14} {:>5} {:>10} {:>10} {:>10} {:>6}\n",
            "averaging", "n", "tau", "1/tau", "MC", "check"
        ));
        for r in &self.averaging {
            out.push_str(&format!(
                "{:<14} {:>5} {:>10} {:>10.6} {:>10.6} {:>6}\n",
                "sphere",
                r.n,
                r.tau,
                r.expected,
                r.estimate.mean,
                verdict(r.passed)
            ));
        }
        out
    }

    /// CSV with one row per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "check,law,n,tau,theory,asymptotic,estimate,stderr,gamma,gamma_stderr,passed\n",
        );
        for r in &self.laws {
            out.push_str(&format!(
                "mu,{},{},NA,{},{},{},{},{},{},{}\n",
                r.law,
                r.n,
                fmt_f64(r.mu_theory),
                r.mu_asymptotic.map_or_else(|| "NA".to_string(), fmt_f64),
                fmt_f64(r.mu.mean),
                fmt_f64(r.mu.stderr),
                fmt_f64(r.gamma.mean),
                fmt_f64(r.gamma.stderr),
                r.passed
            ));
        }
        for r in &self.averaging {
            out.push_str(&format!(
                "averaging,sphere,{},{},{},NA,{},{},NA,NA,{}\n",
                r.n,
                r.tau,
                fmt_f64(r.expected),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                r.passed
            ));
        }
        out
    }
}

/// Probability vector `pᵢ ∝ i`, so weighted laws are visibly non-uniform.
fn ramp_weights(n: usize) -> Vec<f64> {
    let total = (n * (n + 1)) as f64 / 2.0;
    (1..=n).map(|i| i as f64 / total).collect()
}

fn build_law(law: &str, n: usize, seed: u64) -> Result<DirectionSampler> {
    let built = match law {
        "sphere" => DirectionSampler::sphere(n),
        "gaussian" => DirectionSampler::gaussian(n),
        "coord_uniform" => DirectionSampler::coord_uniform(n),
        "coord_weighted" => DirectionSampler::coord_weighted(ramp_weights(n)),
        "ortho_basis" => {
            DirectionSampler::ortho_basis(random_orthonormal_basis(n, seed), ramp_weights(n))
        }
        other => {
            return Err(HarnessError::config(
                "laws",
                format!(
                    "unknown law `{other}` (expected one of {})",
                    VALIDATION_LAWS.join(", ")
                ),
            ))
        }
    };
    built.map_err(|e| HarnessError::config("n", e.to_string()))
}

fn within(est: &Estimate, value: f64) -> bool {
    (est.mean - value).abs() <= Z * est.stderr + 1e-12 * value.abs().max(1.0)
}

/// For every law and dimension, estimates `μ = E|⟨g, s⟩| / ‖g‖_𝒟` at a random
/// `g` and `γ = E‖s‖²`, and checks them against the closed forms (`γ = 1`
/// for every supported law). Then checks direction averaging on the sphere
/// for each dimension and `τ ∈ {4, 16}`.
pub fn validate_assumptions(
    n_list: &[usize],
    laws: &[String],
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if n_samples < 2 {
        return Err(HarnessError::config(
            "samples",
            "need at least 2 samples for a standard error",
        ));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(HarnessError::config("n", "dimensions must be positive"));
    }
    if laws.is_empty() {
        return Err(HarnessError::config("laws", "no laws given"));
    }
    let mut ctx = SampleContext::from_seed(seed);
    let mut rows = Vec::new();
    for law in laws {
        for &n in n_list {
            let sampler = build_law(law, n, seed)?;
            let to_config = |e: stp_core::Error| HarnessError::config("n", e.to_string());
            let g = DirectionSampler::gaussian(n)
                .map_err(to_config)?
                .sample(&mut ctx, None)
                .map_err(to_config)?;
            let norm = sampler.d_norm(&g).map_err(to_config)?;
            let raw = sampler
                .mc_expected_abs_inner(&g, n_samples, &mut ctx)
                .map_err(to_config)?;
            let mu = Estimate {
                mean: raw.mean / norm,
                stderr: raw.stderr / norm,
            };
            let gamma = sampler
                .gamma_check(n_samples, &mut ctx)
                .map_err(to_config)?;
            let mu_theory = sampler.theoretical_mu().map_err(to_config)?;
            rows.push(LawRow {
                law: law.clone(),
                n,
                mu_theory,
                mu_asymptotic: (law == "sphere").then(|| sphere_mu_asymptotic(n)),
                passed: within(&mu, mu_theory) && within(&gamma, 1.0),
                mu,
                gamma,
            });
        }
    }
    let mut averaging = Vec::new();
    for &n in n_list {
        let sampler = build_law("sphere", n, seed)?;
        for tau in AVERAGING_TAUS {
            let estimate = sampler
                .averaged_second_moment(tau, n_samples, &mut ctx)
                .map_err(|e| HarnessError::config("samples", e.to_string()))?;
            let expected = 1.0 / tau as f64;
            averaging.push(AveragingRow {
                n,
                tau,
                expected,
                passed: within(&estimate, expected),
                estimate,
            });
        }
    }
    Ok(ValidationReport {
        laws: rows,
        averaging,
    })
}
