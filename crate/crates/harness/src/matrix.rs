//! Executes an experiment plan: every (tolerance, problem, method, replicate)
//! run, its trace files, and the aggregated records.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use stp_core::problems::suite_load;
use stp_core::{fmt_f64, run, Problem, RunRecord, SolverConfig, StoppingRule, Trace};

use crate::error::{create_dir, write_file, HarnessError, Result};
use crate::plan::ExperimentPlan;
use crate::records::{
    eps_label, runs_csv, skipped_csv, write_records, RecordRow, RunOutcome, Skip,
};

/// Execution options that do not change results.
#[derive(Debug, Clone, Copy)]
pub struct ExecOptions {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    /// Keep every `trace_stride`-th trace row (plus the last one).
    pub trace_stride: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            jobs: None,
            trace_stride: 1,
        }
    }
}

/// Everything a matrix execution produced, in plan order.
#[derive(Debug, Clone)]
pub struct MatrixOutput {
    pub runs: Vec<RunOutcome>,
    pub records: Vec<RecordRow>,
    pub skipped: Vec<Skip>,
}

/// Seed of one run: the first eight bytes of a SHA-256 over the master seed,
/// problem name, method string, and replicate index.
pub fn run_seed(master_seed: u64, problem: &str, method: &str, replicate: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    for part in [problem, method] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((replicate as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

struct Job<'a> {
    eps: f64,
    problem: &'a Problem,
    method: &'a str,
    slug: String,
    cfg: SolverConfig,
    replicate: usize,
}

/// Relative path of a trace file under the output directory.
pub fn trace_path(eps: f64, problem: &str, slug: &str, replicate: usize) -> PathBuf {
    PathBuf::from("traces")
        .join(format!("eps{}", eps_label(eps)))
        .join(format!("{problem}__{slug}__r{replicate}.csv"))
}

/// The sidecar summary file that accompanies a trace file.
pub fn summary_path(trace: &Path) -> PathBuf {
    trace.with_extension("summary.csv")
}

/// Runs the full matrix and writes traces, `runs.csv`, `records.csv`, and
/// `skipped.csv` under the plan's output directory.
///
/// Pairs whose schedule needs a constant the problem lacks are skipped with
/// a logged reason. Failures inside a run are recorded in its status and do
/// not stop the matrix. Output is identical for any number of workers.
pub fn run_matrix(plan: &ExperimentPlan, opts: ExecOptions) -> Result<MatrixOutput> {
    let problems =
        suite_load(&plan.suite).map_err(|e| HarnessError::config("suite", e.to_string()))?;
    if opts.trace_stride == 0 {
        return Err(HarnessError::config(
            "trace_stride",
            "must be a positive integer",
        ));
    }
    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for &eps in &plan.epsilons {
        for problem in &problems {
            for method in &plan.methods {
                match method.resolve(problem, eps) {
                    Ok(cfg) => {
                        for replicate in 0..plan.replicates {
                            jobs.push(Job {
                                eps,
                                problem,
                                method: method.name(),
                                slug: method.slug(),
                                cfg: cfg.clone(),
                                replicate,
                            });
                        }
                    }
                    Err(reason) => {
                        log::warn!(
                            "skipping {} with `{}` at eps {}: {reason}",
                            problem.name(),
                            method,
                            eps_label(eps)
                        );
                        skipped.push(Skip {
                            eps,
                            problem: problem.name().to_string(),
                            method: method.name().to_string(),
                            reason,
                        });
                    }
                }
            }
        }
    }
    for &eps in &plan.epsilons {
        create_dir(
            &plan
                .out_dir
                .join("traces")
                .join(format!("eps{}", eps_label(eps))),
        )?;
    }
    log::info!(
        "running {} runs ({} skipped pairs)",
        jobs.len(),
        skipped.len()
    );

    let execute = || {
        jobs.par_iter()
            .map(|job| execute_job(plan, job, opts.trace_stride))
            .collect::<Vec<_>>()
    };
    let results = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::config("jobs", e.to_string()))?
            .install(execute),
        None => execute(),
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let records = aggregate(&runs, &problems);

    write_records(&plan.out_dir.join("records.csv"), &records)?;
    write_file(&plan.out_dir.join("runs.csv"), &runs_csv(&runs))?;
    write_file(&plan.out_dir.join("skipped.csv"), &skipped_csv(&skipped))?;
    Ok(MatrixOutput {
        runs,
        records,
        skipped,
    })
}

fn execute_job(plan: &ExperimentPlan, job: &Job<'_>, stride: u64) -> Result<RunOutcome> {
    let name = job.problem.name();
    let seed = run_seed(plan.master_seed, name, job.method, job.replicate);
    let stop = StoppingRule::new(job.eps, job.problem.f_star()).with_max_evals(plan.max_evals);
    let rel = trace_path(job.eps, name, &job.slug, job.replicate);
    let path = plan.out_dir.join(&rel);
    let outcome = |status: String, evals_to_target, total_evals, final_f| RunOutcome {
        eps: job.eps,
        problem: name.to_string(),
        method: job.method.to_string(),
        replicate: job.replicate,
        seed,
        status,
        evals_to_target,
        total_evals,
        final_f,
        trace: rel.clone(),
    };
    match run(job.problem, &job.cfg, &stop, seed) {
        Ok(trace) => {
            if let Some(msg) = &trace.message {
                log::warn!(
                    "{name} with `{}` (replicate {}): {msg}",
                    job.method,
                    job.replicate
                );
            }
            write_file(&path, &thinned(&trace, stride).to_csv())?;
            write_file(&summary_path(&path), &trace.summary_csv())?;
            Ok(outcome(
                trace.status.to_string(),
                trace.evals_to_target,
                trace.total_evals,
                trace.final_value(),
            ))
        }
        Err(e) => {
            log::error!(
                "{name} with `{}` (replicate {}) failed: {e}",
                job.method,
                job.replicate
            );
            write_file(&path, "k,f,evals,alpha\n")?;
            write_file(
                &summary_path(&path),
                "status,evals_to_target,total_evals,iterations\nerror,NA,0,0\n",
            )?;
            Ok(outcome("error".into(), None, 0, f64::NAN))
        }
    }
}

fn thinned(trace: &Trace, stride: u64) -> Trace {
    if stride <= 1 {
        return trace.clone();
    }
    let mut t = trace.clone();
    let last = t.records.last().map(|r| r.k);
    t.records.retain(|r| r.k % stride == 0 || Some(r.k) == last);
    t
}

/// One record per (tolerance, problem, method), in run order.
fn aggregate(runs: &[RunOutcome], problems: &[Problem]) -> Vec<RecordRow> {
    let mut rows: Vec<RecordRow> = Vec::new();
    let mut start = 0;
    while start < runs.len() {
        let first = &runs[start];
        let end = start
            + runs[start..]
                .iter()
                .take_while(|r| {
                    r.eps == first.eps && r.problem == first.problem && r.method == first.method
                })
                .count();
        let group = &runs[start..end];
        let hits: Vec<Option<u64>> = group.iter().map(|r| r.evals_to_target).collect();
        let record = RunRecord::aggregate(&first.problem, &first.method, &hits);
        let convexity = problems
            .iter()
            .find(|p| p.name() == first.problem)
            .map_or("nonconvex", |p| p.convexity().as_str());
        rows.push(RecordRow {
            eps: first.eps,
            problem: first.problem.clone(),
            method: first.method.clone(),
            convexity: convexity.to_string(),
            replicates: group.len(),
            solved: hits.iter().flatten().count(),
            mean_evals_to_target: record.mean_evals_to_target,
            total_evals: group.iter().map(|r| r.total_evals).sum(),
        });
        start = end;
    }
    rows
}

/// Renders a floating-point value for CSV output.
pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_component() {
        let base = run_seed(1, "p", "m", 0);
        assert_eq!(base, run_seed(1, "p", "m", 0));
        assert_ne!(base, run_seed(2, "p", "m", 0));
        assert_ne!(base, run_seed(1, "q", "m", 0));
        assert_ne!(base, run_seed(1, "p", "n", 0));
        assert_ne!(base, run_seed(1, "p", "m", 1));
        // Length prefixes keep concatenations apart.
        assert_ne!(run_seed(1, "ab", "c", 0), run_seed(1, "a", "bc", 0));
    }

    #[test]
    fn trace_files_are_grouped_by_tolerance() {
        let p = trace_path(1e-3, "quadratic_10", "dds_alpha0=1", 4);
        assert_eq!(
            p,
            PathBuf::from("traces/eps1e-3/quadratic_10__dds_alpha0=1__r4.csv")
        );
        assert_eq!(
            summary_path(&p),
            PathBuf::from("traces/eps1e-3/quadratic_10__dds_alpha0=1__r4.summary.csv")
        );
    }
}
