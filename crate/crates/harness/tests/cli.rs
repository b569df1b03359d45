//! End-to-end tests of the `stp` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stp_harness::records::read_records;

fn stp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn stp")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn run_ok(args: &[&str]) -> Output {
    let out = stp(args);
    assert!(
        out.status.success(),
        "stp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn trace_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for eps_dir in fs::read_dir(dir.join("traces")).unwrap() {
        for f in fs::read_dir(eps_dir.unwrap().path()).unwrap() {
            files.push(f.unwrap().path());
        }
    }
    files.sort();
    files
}

fn is_summary(p: &Path) -> bool {
    p.to_str().unwrap().ends_with(".summary.csv")
}

fn small_smoke_run(dir: &Path, extra: &[&str]) -> Output {
    let out = out_arg(dir);
    let mut args = vec![
        "run",
        "--suite",
        "smoke",
        "--method",
        "stp:sphere:inv_sqrt:alpha0=1",
        "--method",
        "dds",
        "--eps",
        "1e-3",
        "--seeds",
        "2",
        "--max-evals",
        "3000",
        "--out",
        &out,
    ];
    args.extend_from_slice(extra);
    run_ok(&args)
}

#[test]
fn smoke_matrix_writes_twelve_traces_and_six_records() {
    let dir = tempfile::tempdir().unwrap();
    small_smoke_run(dir.path(), &[]);
    let files = trace_files(dir.path());
    let traces: Vec<_> = files.iter().filter(|p| !is_summary(p)).collect();
    let summaries: Vec<_> = files.iter().filter(|p| is_summary(p)).collect();
    assert_eq!(traces.len(), 12);
    assert_eq!(summaries.len(), 12);
    assert_eq!(
        read_records(&dir.path().join("records.csv")).unwrap().len(),
        6
    );
    for t in traces {
        let text = fs::read_to_string(t).unwrap();
        assert!(text.starts_with("k,f,evals,alpha\n"), "{}", t.display());
    }
}

#[test]
fn identical_plans_give_identical_outputs_for_any_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_smoke_run(a.path(), &["--jobs", "1"]);
    small_smoke_run(b.path(), &["--jobs", "3"]);
    for name in [
        "records.csv",
        "runs.csv",
        "profile_eps1e-3.csv",
        "profile_eps1e-3.svg",
        "summary.txt",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let (ta, tb) = (trace_files(a.path()), trace_files(b.path()));
    assert_eq!(ta.len(), tb.len());
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(
            fs::read(x).unwrap(),
            fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }
}

fn summary_fields(path: &Path) -> BTreeMap<String, String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',');
    let values = lines.next().unwrap().split(',');
    header
        .map(String::from)
        .zip(values.map(String::from))
        .collect()
}

#[test]
fn records_conserve_evaluations_and_respect_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    small_smoke_run(dir.path(), &[]);
    let records = read_records(&dir.path().join("records.csv")).unwrap();
    let mut per_pair: BTreeMap<(String, String), u64> = BTreeMap::new();
    for path in trace_files(dir.path())
        .into_iter()
        .filter(|p| is_summary(p))
    {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let mut parts = name.split("__");
        let problem = parts.next().unwrap().to_string();
        let slug = parts.next().unwrap().to_string();
        let total: u64 = summary_fields(&path)["total_evals"].parse().unwrap();
        let dim: u64 = problem.rsplit('_').next().unwrap().parse().unwrap();
        // Overshoot is at most one iteration: 2n polls for DDS, 2 for STP.
        let allowance = if slug.starts_with("dds") { 2 * dim } else { 2 };
        assert!(total <= 3000 + allowance, "{name}: {total}");
        *per_pair.entry((problem, slug)).or_default() += total;
    }
    for r in &records {
        let slug = if r.method == "dds" {
            "dds".to_string()
        } else {
            "stp_sphere_inv_sqrt_alpha0=1".to_string()
        };
        assert_eq!(
            per_pair[&(r.problem.clone(), slug)],
            r.total_evals,
            "{}/{}",
            r.problem,
            r.method
        );
    }
}

#[test]
fn report_rebuilds_profiles_from_saved_records() {
    let dir = tempfile::tempdir().unwrap();
    small_smoke_run(dir.path(), &[]);
    let csv = fs::read(dir.path().join("profile_eps1e-3.csv")).unwrap();
    let svg = fs::read(dir.path().join("profile_eps1e-3.svg")).unwrap();
    let again = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    run_ok(&[
        "report",
        "--records",
        records.to_str().unwrap(),
        "--out",
        &out_arg(again.path()),
    ]);
    assert_eq!(
        fs::read(again.path().join("profile_eps1e-3.csv")).unwrap(),
        csv
    );
    assert_eq!(
        fs::read(again.path().join("profile_eps1e-3.svg")).unwrap(),
        svg
    );
    // Two solver columns plus log2_tau, and 64 grid rows.
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "log2_tau,stp:sphere:inv_sqrt:alpha0=1,dds"
    );
    assert_eq!(text.lines().count(), 65);
    // Reporting does not run solvers: no traces appear.
    assert!(!again.path().join("traces").exists());
}

#[test]
fn eps_scaled_fixed_stepsize_is_used_per_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--suite",
        "smoke",
        "--method",
        "stp:sphere:fixed:alpha=0.1*eps",
        "--eps",
        "1e-1,1e-2",
        "--seeds",
        "1",
        "--max-evals",
        "200",
        "--out",
        &out_arg(dir.path()),
    ]);
    for (label, alpha) in [("1e-1", 0.1 * 1e-1), ("1e-2", 0.1 * 1e-2)] {
        let path = dir.path().join(format!(
            "traces/eps{label}/quadratic_10__stp_sphere_fixed_alpha=0.1_eps__r0.csv"
        ));
        let text = fs::read_to_string(&path).unwrap();
        let row = text.lines().nth(2).unwrap();
        let logged: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(logged, alpha, "{row}");
    }
}

#[test]
fn omitted_budget_defaults_to_one_hundred_thousand() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--suite",
        "smoke",
        "--method",
        "dds",
        "--eps",
        "1e-1",
        "--seeds",
        "1",
        "--out",
        &out_arg(dir.path()),
    ]);
    let plan = fs::read_to_string(dir.path().join("plan.txt")).unwrap();
    assert!(plan.contains("max_evals = 100000\n"), "{plan}");
}

fn assert_config_error(args: &[&str], key: &str) {
    let out = stp(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&format!("`{key}`")), "{args:?}: {stderr}");
}

#[test]
fn configuration_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_config_error(&["run", "--eps", "-1", "--out", &out], "eps");
    assert_config_error(&["run", "--seeds", "0", "--out", &out], "seeds");
    assert_config_error(&["run", "--max-evals", "ten", "--out", &out], "max_evals");
    assert_config_error(&["run", "--suite", "bogus", "--out", &out], "suite");
    assert_config_error(&["run", "--method", "newton", "--out", &out], "method");
    assert_config_error(&["list", "--suite", "bogus"], "suite");
    let plan = dir.path().join("plan.cfg");
    fs::write(&plan, "suite = smoke\ncolour = blue\n").unwrap();
    assert_config_error(
        &["run", "--plan", plan.to_str().unwrap(), "--out", &out],
        "colour",
    );
    // Unknown flags are usage errors with the same exit code.
    assert_eq!(stp(&["run", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("sub");
    let res = stp(&[
        "run",
        "--method",
        "dds",
        "--eps",
        "1e-1",
        "--seeds",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        stp(&["report", "--records", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        stp(&["run", "--plan", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn plan_file_drives_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.cfg");
    let out = dir.path().join("out");
    fs::write(
        &plan,
        format!(
            "# small plan\n[plan]\nsuite = smoke\nmethod = dds\nmethod = rgf:sphere\neps = 1e-1\nseeds = 3\nmax_evals = 500\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    run_ok(&["run", "--plan", plan.to_str().unwrap(), "--seeds", "1"]);
    let records = read_records(&out.join("records.csv")).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r.replicates == 1));
    // The echoed plan reproduces the run.
    let echoed = out.join("plan.txt");
    let again = dir.path().join("again");
    run_ok(&[
        "run",
        "--plan",
        echoed.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(out.join("records.csv")).unwrap(),
        fs::read(again.join("records.csv")).unwrap()
    );
}

#[test]
fn incompatible_schedules_are_skipped_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--suite",
        "smoke",
        "--method",
        "stp:sphere:gap_sqrt:theta=1",
        "--method",
        "dds",
        "--eps",
        "1e-1",
        "--seeds",
        "1",
        "--max-evals",
        "500",
        "--out",
        &out_arg(dir.path()),
    ]);
    let skipped = fs::read_to_string(dir.path().join("skipped.csv")).unwrap();
    assert_eq!(skipped.lines().count(), 2, "{skipped}");
    assert!(skipped.contains("rosenbrock_2"), "{skipped}");
    assert_eq!(
        read_records(&dir.path().join("records.csv")).unwrap().len(),
        5
    );
}

#[test]
fn list_prints_the_manifest() {
    let out = run_ok(&["list", "--suite", "smoke"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("name,dim,f_star,L,lambda,convexity_class")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn validate_brackets_the_closed_form_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "validate",
        "--n",
        "2,10",
        "--laws",
        "sphere,gaussian,coord_uniform,coord_weighted,ortho_basis",
        "--samples",
        "200000",
        "--seed",
        "5",
        "--out",
        &out_arg(dir.path()),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("FAIL"), "{text}");
    let csv = fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    let row = |law: &str, n: &str| -> Vec<String> {
        csv.lines()
            .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
            .find(|f| f[0] == "mu" && f[1] == law && f[2] == n)
            .unwrap()
    };
    let sphere2 = row("sphere", "2");
    let theory: f64 = sphere2[4].parse().unwrap();
    assert!((theory - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    let gauss10 = row("gaussian", "10");
    let theory: f64 = gauss10[4].parse().unwrap();
    assert!((theory - 0.25231).abs() < 1e-5);
    let coord = row("coord_uniform", "10");
    assert_eq!(coord[8].parse::<f64>().unwrap(), 1.0);
    // Averaging rows for both tau values at both dimensions.
    assert_eq!(
        csv.lines().filter(|l| l.starts_with("averaging")).count(),
        4
    );
}
