//! Experiment plans from command-line flags or a flat `key=value` file.
//!
//! A plan file holds one `key = value` pair per line; `#` starts a comment,
//! and an optional `[plan]` header is accepted. `method` and `eps` may be
//! repeated, and `eps` also accepts a comma-separated list:
//!
//! ```text
//! [plan]
//! suite = smoke
//! method = stp:sphere:inv_sqrt:alpha0=1
//! method = dds
//! eps = 1e-1, 1e-3
//! seeds = 10
//! max_evals = 100000
//! master_seed = 7
//! out = results
//! ```

use std::path::{Path, PathBuf};

use stp_core::problems::SUITE_NAMES;
use stp_core::solvers::DEFAULT_MAX_EVALS;

use crate::error::{HarnessError, Result};
use crate::methods::{MethodSpec, DEFAULT_METHODS};

/// Tolerances used when a plan names none.
pub const DEFAULT_EPSILONS: [f64; 3] = [1e-1, 1e-3, 1e-5];
/// Replicates per (problem, method) pair when a plan names none.
pub const DEFAULT_REPLICATES: usize = 10;
/// Output directory when a plan names none.
pub const DEFAULT_OUT_DIR: &str = "results";

/// A fully validated experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub suite: String,
    pub methods: Vec<MethodSpec>,
    pub epsilons: Vec<f64>,
    pub replicates: usize,
    pub max_evals: u64,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    /// The plan in plan-file syntax; reading it back yields the same plan.
    pub fn to_text(&self) -> String {
        let mut out = String::from("[plan]\n");
        out.push_str(&format!("suite = {}\n", self.suite));
        for m in &self.methods {
            out.push_str(&format!("method = {m}\n"));
        }
        for e in &self.epsilons {
            out.push_str(&format!("eps = {}\n", crate::records::eps_label(*e)));
        }
        out.push_str(&format!("seeds = {}\n", self.replicates));
        out.push_str(&format!("max_evals = {}\n", self.max_evals));
        out.push_str(&format!("master_seed = {}\n", self.master_seed));
        out.push_str(&format!("out = {}\n", self.out_dir.display()));
        out
    }
}

/// Unvalidated plan fields as raw strings, so every error can name its key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanInput {
    pub suite: Option<String>,
    pub methods: Vec<String>,
    pub eps: Vec<String>,
    pub seeds: Option<String>,
    pub max_evals: Option<String>,
    pub master_seed: Option<String>,
    pub out: Option<String>,
}

impl PlanInput {
    /// Parses plan-file text; unknown keys and malformed lines are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut input = PlanInput::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "[plan]" {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::config("plan", format!("line {}: expected `key = value`", i + 1))
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().to_string();
            let single = |slot: &mut Option<String>, key: &str| {
                if slot.replace(value.clone()).is_some() {
                    Err(HarnessError::config(key, "given more than once"))
                } else {
                    Ok(())
                }
            };
            match key.as_str() {
                "suite" => single(&mut input.suite, "suite")?,
                "method" => input.methods.push(value),
                "eps" => input.eps.push(value),
                "seeds" | "replicates" => single(&mut input.seeds, "seeds")?,
                "max_evals" => single(&mut input.max_evals, "max_evals")?,
                "master_seed" => single(&mut input.master_seed, "master_seed")?,
                "out" => single(&mut input.out, "out")?,
                other => return Err(HarnessError::config(other, "unknown plan key")),
            }
        }
        Ok(input)
    }

    /// Reads and parses a plan file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_text(&text)
    }

    /// Fields set in `over` replace those in `self`; lists replace wholesale.
    pub fn overlay(self, over: PlanInput) -> PlanInput {
        PlanInput {
            suite: over.suite.or(self.suite),
            methods: if over.methods.is_empty() {
                self.methods
            } else {
                over.methods
            },
            eps: if over.eps.is_empty() {
                self.eps
            } else {
                over.eps
            },
            seeds: over.seeds.or(self.seeds),
            max_evals: over.max_evals.or(self.max_evals),
            master_seed: over.master_seed.or(self.master_seed),
            out: over.out.or(self.out),
        }
    }

    /// Applies defaults and validates every field.
    pub fn into_plan(self) -> Result<ExperimentPlan> {
        let suite = self.suite.unwrap_or_else(|| "smoke".to_string());
        if !SUITE_NAMES.contains(&suite.as_str()) {
            return Err(HarnessError::config(
                "suite",
                format!(
                    "unknown suite `{suite}` (expected one of {})",
                    SUITE_NAMES.join(", ")
                ),
            ));
        }
        let method_texts: Vec<String> = if self.methods.is_empty() {
            DEFAULT_METHODS.iter().map(|s| s.to_string()).collect()
        } else {
            self.methods
        };
        let methods = method_texts
            .iter()
            .map(|m| MethodSpec::parse(m))
            .collect::<Result<Vec<_>>>()?;
        for (i, m) in methods.iter().enumerate() {
            if methods[..i]
                .iter()
                .any(|o| o.name() == m.name() || o.slug() == m.slug())
            {
                return Err(HarnessError::config(
                    "method",
                    format!("`{m}` listed twice"),
                ));
            }
        }
        let mut epsilons = Vec::new();
        for item in self.eps.iter().flat_map(|e| e.split(',')) {
            let item = item.trim();
            let eps = item
                .parse::<f64>()
                .ok()
                .filter(|e| *e > 0.0 && *e < 1.0)
                .ok_or_else(|| {
                    HarnessError::config("eps", format!("must lie in (0, 1), got `{item}`"))
                })?;
            if epsilons.contains(&eps) {
                return Err(HarnessError::config(
                    "eps",
                    format!("`{item}` listed twice"),
                ));
            }
            epsilons.push(eps);
        }
        if epsilons.is_empty() {
            epsilons = DEFAULT_EPSILONS.to_vec();
        }
        let replicates =
            parse_positive(self.seeds.as_deref(), "seeds", DEFAULT_REPLICATES as u64)? as usize;
        let max_evals = parse_positive(self.max_evals.as_deref(), "max_evals", DEFAULT_MAX_EVALS)?;
        let master_seed = match self.master_seed {
            Some(s) => s.trim().parse::<u64>().map_err(|_| {
                HarnessError::config(
                    "master_seed",
                    format!("must be a nonnegative integer, got `{s}`"),
                )
            })?,
            None => 0,
        };
        let out_dir = PathBuf::from(self.out.unwrap_or_else(|| DEFAULT_OUT_DIR.to_string()));
        Ok(ExperimentPlan {
            suite,
            methods,
            epsilons,
            replicates,
            max_evals,
            master_seed,
            out_dir,
        })
    }
}

fn parse_positive(value: Option<&str>, key: &str, default: u64) -> Result<u64> {
    match value {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|v| *v >= 1)
            .ok_or_else(|| {
                HarnessError::config(key, format!("must be a positive integer, got `{s}`"))
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_an_empty_plan() {
        let plan = PlanInput::default().into_plan().unwrap();
        assert_eq!(plan.suite, "smoke");
        assert_eq!(plan.epsilons, DEFAULT_EPSILONS.to_vec());
        assert_eq!(plan.replicates, 10);
        assert_eq!(plan.max_evals, 100_000);
        assert_eq!(plan.methods.len(), DEFAULT_METHODS.len());
    }

    #[test]
    fn file_values_yield_to_flags() {
        let file = PlanInput::from_text("suite = convex\nseeds = 3\neps = 1e-1, 1e-2\n").unwrap();
        let flags = PlanInput {
            seeds: Some("5".into()),
            ..PlanInput::default()
        };
        let plan = file.overlay(flags).into_plan().unwrap();
        assert_eq!(plan.suite, "convex");
        assert_eq!(plan.replicates, 5);
        assert_eq!(plan.epsilons, vec![1e-1, 1e-2]);
    }

    #[test]
    fn errors_name_the_offending_key() {
        let key_of = |input: PlanInput| match input.into_plan().unwrap_err() {
            HarnessError::Config { key, .. } => key,
            other => panic!("unexpected {other}"),
        };
        let with = |f: fn(&mut PlanInput)| {
            let mut p = PlanInput::default();
            f(&mut p);
            p
        };
        assert_eq!(key_of(with(|p| p.eps = vec!["-1".into()])), "eps");
        assert_eq!(key_of(with(|p| p.eps = vec!["abc".into()])), "eps");
        assert_eq!(key_of(with(|p| p.seeds = Some("0".into()))), "seeds");
        assert_eq!(
            key_of(with(|p| p.max_evals = Some("-5".into()))),
            "max_evals"
        );
        assert_eq!(key_of(with(|p| p.suite = Some("nope".into()))), "suite");
        assert_eq!(
            key_of(with(|p| p.master_seed = Some("x".into()))),
            "master_seed"
        );
        assert_eq!(
            key_of(with(|p| p.methods = vec!["dds".into(), "dds".into()])),
            "method"
        );
    }

    #[test]
    fn plan_text_round_trips() {
        let plan = PlanInput {
            methods: vec!["pstp:sphere:gap_sqrt:tau=8,theta=1".into(), "dds".into()],
            eps: vec!["1e-2".into()],
            master_seed: Some("99".into()),
            ..PlanInput::default()
        }
        .into_plan()
        .unwrap();
        let again = PlanInput::from_text(&plan.to_text())
            .unwrap()
            .into_plan()
            .unwrap();
        assert_eq!(again, plan);
    }

    #[test]
    fn unknown_plan_keys_are_rejected() {
        match PlanInput::from_text("suite = smoke\ncolour = blue\n").unwrap_err() {
            HarnessError::Config { key, .. } => assert_eq!(key, "colour"),
            other => panic!("unexpected {other}"),
        }
        assert!(PlanInput::from_text("just words\n").is_err());
        assert!(PlanInput::from_text("seeds = 1\nseeds = 2\n").is_err());
    }
}
