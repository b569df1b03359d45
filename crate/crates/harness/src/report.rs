//! Performance-profile files and the per-solver summary table.

use std::path::Path;

use stp_core::profiles::{default_tau_grid, emit_profile_data, profile_file_stem};
use stp_core::{performance_ratios, profile_curve, ProfileCurve};

use crate::error::{create_dir, write_file, HarnessError, Result};
use crate::records::{eps_label, RecordRow};

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub eps: f64,
    pub solver: String,
    /// `ρ(1)`: share of problems on which the solver is (one of) the fastest.
    pub efficiency: f64,
    /// `ρ(τ_max)`: share of problems solved within the budget.
    pub robustness: f64,
    pub solved: usize,
    pub problems: usize,
    /// Mean performance ratio over the convex members of the suite, with
    /// unsolved pairs counted at the sentinel ratio.
    pub convex_mean_ratio: Option<f64>,
}

/// Everything `report` produced for one tolerance.
#[derive(Debug, Clone)]
pub struct ToleranceReport {
    pub eps: f64,
    pub curves: Vec<ProfileCurve>,
    pub summaries: Vec<SolverSummary>,
}

/// Computes profiles and summaries from records without running anything.
pub fn build_report(records: &[RecordRow]) -> Result<Vec<ToleranceReport>> {
    if records.is_empty() {
        return Err(HarnessError::config("records", "no records"));
    }
    let mut tolerances: Vec<f64> = Vec::new();
    for r in records {
        if !tolerances.contains(&r.eps) {
            tolerances.push(r.eps);
        }
    }
    let grid = default_tau_grid();
    let mut out = Vec::new();
    for eps in tolerances {
        let rows: Vec<&RecordRow> = records.iter().filter(|r| r.eps == eps).collect();
        let run_records: Vec<_> = rows.iter().map(|r| r.run_record()).collect();
        let table = performance_ratios(&run_records)
            .map_err(|e| HarnessError::config("records", e.to_string()))?;
        let convex: Vec<usize> = table
            .problems
            .iter()
            .enumerate()
            .filter(|(_, p)| rows.iter().any(|r| &r.problem == *p && r.is_convex()))
            .map(|(i, _)| i)
            .collect();
        let mut curves = Vec::new();
        let mut summaries = Vec::new();
        for (s, solver) in table.solvers.iter().enumerate() {
            let curve = profile_curve(&table, solver, &grid)
                .map_err(|e| HarnessError::config("records", e.to_string()))?;
            let solved = rows
                .iter()
                .filter(|r| &r.method == solver && r.mean_evals_to_target.is_some())
                .count();
            let convex_mean_ratio = (!convex.is_empty()).then(|| {
                convex.iter().map(|&p| table.value(p, s)).sum::<f64>() / convex.len() as f64
            });
            summaries.push(SolverSummary {
                eps,
                solver: solver.clone(),
                efficiency: curve.efficiency(),
                robustness: curve.robustness(),
                solved,
                problems: table.problems.len(),
                convex_mean_ratio,
            });
            curves.push(curve);
        }
        summaries.sort_by(|a, b| match (a.convex_mean_ratio, b.convex_mean_ratio) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
        out.push(ToleranceReport {
            eps,
            curves,
            summaries,
        });
    }
    Ok(out)
}

/// Writes one `profile_eps{ε}.csv`/`.svg` pair per tolerance and
/// `summary.txt` into `out_dir`; returns the summary text.
pub fn report(records: &[RecordRow], out_dir: &Path) -> Result<String> {
    let reports = build_report(records)?;
    create_dir(out_dir)?;
    for r in &reports {
        let stem = profile_file_stem(r.eps);
        emit_profile_data(&r.curves, out_dir, &stem)
            .map_err(|e| HarnessError::io(&out_dir.join(&stem), e))?;
    }
    let text = summary_text(&reports);
    write_file(&out_dir.join("summary.txt"), &text)?;
    Ok(text)
}

/// Fixed-width table, one block per tolerance, solvers ordered by their mean
/// ratio on convex problems.
pub fn summary_text(reports: &[ToleranceReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let width = r
            .summaries
            .iter()
            .map(|s| s.solver.len())
            .max()
            .unwrap_or(6)
            .max(6);
        out.push_str(&format!("eps = {}\n", eps_label(r.eps)));
        out.push_str(&format!(
            "  {:<width$}  {:>10}  {:>10}  {:>8}  {:>17}\n",
            "solver", "rho(1)", "rho(tmax)", "solved", "convex mean ratio"
        ));
        for s in &r.summaries {
            out.push_str(&format!(
                "  {:<width$}  {:>10.4}  {:>10.4}  {:>8}  {:>17}\n",
                s.solver,
                s.efficiency,
                s.robustness,
                format!("{}/{}", s.solved, s.problems),
                s.convex_mean_ratio
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.3}")),
            ));
        }
        out.push('\n');
    }
    out
}
