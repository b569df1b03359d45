//! Dolan–Moré performance profiles.
//!
//! For problem `p` and solver `s` with cost `t_{p,s}` the performance ratio is
//! `r_{p,s} = t_{p,s} / min_s t_{p,s}`, and the profile of `s` is the fraction
//! of problems with `r_{p,s} ≤ τ`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::error::{invalid, Result};

/// Aggregated outcome of the replicates of one (problem, solver) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    /// `None` when the pair counts as unsolved.
    pub mean_evals_to_target: Option<f64>,
    pub n_replicates: usize,
}

impl RunRecord {
    /// Mean evaluations-to-target over the replicates that reached the target.
    /// The pair is unsolved when fewer than half of the replicates did.
    pub fn aggregate(problem: &str, solver: &str, evals_to_target: &[Option<u64>]) -> Self {
        let solved: Vec<f64> = evals_to_target
            .iter()
            .flatten()
            .map(|&e| e as f64)
            .collect();
        let quorum = 2 * solved.len() >= evals_to_target.len() && !solved.is_empty();
        Self {
            problem: problem.to_string(),
            solver: solver.to_string(),
            mean_evals_to_target: quorum.then(|| solved.iter().sum::<f64>() / solved.len() as f64),
            n_replicates: evals_to_target.len(),
        }
    }
}

/// Performance ratio of one (problem, solver) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Unsolved,
}

/// `r_{p,s}` for every problem and solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub problems: Vec<String>,
    pub solvers: Vec<String>,
    /// `cells[p][s]`.
    pub cells: Vec<Vec<Ratio>>,
    /// Value written for unsolved cells: twice the largest finite ratio.
    pub sentinel: f64,
}

impl RatioTable {
    pub fn get(&self, problem: &str, solver: &str) -> Option<Ratio> {
        let p = self.problems.iter().position(|n| n == problem)?;
        let s = self.solvers.iter().position(|n| n == solver)?;
        Some(self.cells[p][s])
    }

    /// Numeric value of a cell, with the sentinel standing in for unsolved.
    pub fn value(&self, p: usize, s: usize) -> f64 {
        match self.cells[p][s] {
            Ratio::Finite(r) => r,
            Ratio::Unsolved => self.sentinel,
        }
    }
}

/// Builds the ratio table. Problems and solvers keep first-appearance order;
/// pairs missing from `records` count as unsolved.
pub fn performance_ratios(records: &[RunRecord]) -> Result<RatioTable> {
    if records.is_empty() {
        return Err(invalid("no run records"));
    }
    let mut problems: Vec<String> = Vec::new();
    let mut solvers: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((r.problem.clone(), r.solver.clone())) {
            return Err(invalid(format!(
                "duplicate record for problem `{}` and solver `{}`",
                r.problem, r.solver
            )));
        }
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
    }
    let mut costs = vec![vec![None; solvers.len()]; problems.len()];
    for r in records {
        if let Some(t) = r.mean_evals_to_target {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!(
                    "cost {t} for `{}`/`{}` is not positive",
                    r.problem, r.solver
                )));
            }
            let p = problems.iter().position(|n| *n == r.problem).unwrap();
            let s = solvers.iter().position(|n| *n == r.solver).unwrap();
            costs[p][s] = Some(t);
        }
    }
    let cells: Vec<Vec<Ratio>> = costs
        .iter()
        .map(|row| {
            let best = row.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            row.iter()
                .map(|c| match c {
                    Some(t) if best.is_finite() => Ratio::Finite(t / best),
                    _ => Ratio::Unsolved,
                })
                .collect()
        })
        .collect();
    let max_finite = cells
        .iter()
        .flatten()
        .filter_map(|r| match r {
            Ratio::Finite(v) => Some(*v),
            Ratio::Unsolved => None,
        })
        .fold(1.0, f64::max);
    Ok(RatioTable {
        problems,
        solvers,
        cells,
        sentinel: 2.0 * max_finite,
    })
}

/// Profile of one solver sampled on a τ grid, stored against `log₂ τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    /// `(log₂ τ, ρ(τ))`.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `ρ(1)`: share of problems where the solver is (one of) the best.
    pub fn efficiency(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.1)
    }

    /// `ρ(τ_max)`: share of problems solved at all.
    pub fn robustness(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

/// 64 log-spaced points from `2⁰` to `2¹⁰`.
pub fn default_tau_grid() -> Vec<f64> {
    (0..64).map(|i| (10.0 * i as f64 / 63.0).exp2()).collect()
}

pub fn profile_curve(ratios: &RatioTable, solver: &str, tau_grid: &[f64]) -> Result<ProfileCurve> {
    let s = ratios
        .solvers
        .iter()
        .position(|n| n == solver)
        .ok_or_else(|| invalid(format!("unknown solver `{solver}`")))?;
    if tau_grid.is_empty() || tau_grid[0] != 1.0 {
        return Err(invalid("tau grid must start at 1"));
    }
    if tau_grid
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(invalid("tau grid must be strictly increasing"));
    }
    let n_problems = ratios.problems.len() as f64;
    let points = tau_grid
        .iter()
        .map(|&tau| {
            let count = ratios
                .cells
                .iter()
                .filter(|row| matches!(row[s], Ratio::Finite(r) if r <= tau))
                .count();
            (tau.log2(), count as f64 / n_problems)
        })
        .collect();
    Ok(ProfileCurve {
        solver: solver.to_string(),
        points,
    })
}

/// File stem for the profile of a given ε, e.g. `profile_eps1e-3`.
pub fn profile_file_stem(epsilon: f64) -> String {
    format!("profile_eps{epsilon:e}")
}

/// CSV with columns `log2_tau,<solver1>,<solver2>,…`.
pub fn profile_csv(curves: &[ProfileCurve]) -> Result<String> {
    let first = curves.first().ok_or_else(|| invalid("no profile curves"))?;
    for c in curves {
        if c.points.len() != first.points.len()
            || c.points.iter().zip(&first.points).any(|(a, b)| a.0 != b.0)
        {
            return Err(invalid("profile curves must share one tau grid"));
        }
    }
    let mut out = String::from("log2_tau");
    for c in curves {
        out.push(',');
        out.push_str(&csv_field(&c.solver));
    }
    out.push('\n');
    for (i, (x, _)) in first.points.iter().enumerate() {
        out.push_str(&crate::fmt_f64(*x));
        for c in curves {
            out.push(',');
            out.push_str(&crate::fmt_f64(c.points[i].1));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Quotes a CSV field when it contains a separator, quote, or line break.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Step-interpolated line chart of the profiles.
pub fn profile_svg(curves: &[ProfileCurve], title: &str) -> Result<String> {
    profile_csv(curves)?;
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 170.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let x_max = curves[0].points.last().map_or(1.0, |p| p.0).max(1e-12);
    let px = |x: f64| left + plot_w * x / x_max;
    let py = |y: f64| top + plot_h * (1.0 - y);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + plot_w / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#ddd"/><text x="{2}" y="{3:.2}" text-anchor="end">{y:.1}</text>"##,
            py(y),
            left + plot_w,
            left - 6.0,
            py(y) + 4.0
        );
    }
    let ticks = x_max.ceil() as usize;
    for i in 0..=ticks {
        let x = i as f64;
        if x > x_max {
            break;
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#,
            px(x),
            top + plot_h + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log2(tau)</text>"#,
        left + plot_w / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">rho(tau)</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, (x, y)) in c.points.iter().enumerate() {
            if j == 0 {
                let _ = write!(d, "M{:.2},{:.2}", px(*x), py(*y));
            } else {
                // Hold the previous value until the next grid point.
                let prev = c.points[j - 1].1;
                let _ = write!(
                    d,
                    " L{:.2},{:.2} L{:.2},{:.2}",
                    px(*x),
                    py(prev),
                    px(*x),
                    py(*y)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{ly:.2}" x2="{1:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{2:.2}" y="{3:.2}">{4}</text>"#,
            left + plot_w + 10.0,
            left + plot_w + 30.0,
            left + plot_w + 36.0,
            ly + 4.0,
            xml_escape(&c.solver)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes `<stem>.csv` and `<stem>.svg` into `dir`.
pub fn emit_profile_data(
    curves: &[ProfileCurve],
    dir: &Path,
    stem: &str,
) -> io::Result<(PathBuf, PathBuf)> {
    let to_io = |e: crate::Error| io::Error::new(io::ErrorKind::InvalidInput, e.to_string());
    let csv = profile_csv(curves).map_err(to_io)?;
    let svg = profile_svg(curves, stem).map_err(to_io)?;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    fs::write(&csv_path, csv)?;
    fs::write(&svg_path, svg)?;
    Ok((csv_path, svg_path))
}
