//! Command-line interface of the `stp` binary.
//!
//! Exit codes: 0 on success, 1 when `validate` finds a failing check,
//! 2 on a configuration error, 3 on an I/O error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stp_core::problems::{manifest_csv, suite_load};

use crate::error::{create_dir, write_file, HarnessError, Result};
use crate::matrix::{run_matrix, ExecOptions};
use crate::plan::{PlanInput, DEFAULT_OUT_DIR};
use crate::records::read_records;
use crate::report::report;
use crate::validate::{validate_assumptions, VALIDATION_LAWS};

#[derive(Debug, Parser)]
#[command(
    name = "stp",
    version,
    about = "Stochastic three points benchmarks: run, report, validate, list"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment matrix, then write profiles and a summary.
    Run(RunArgs),
    /// Rebuild profiles and the summary from a saved records file.
    Report(ReportArgs),
    /// Monte-Carlo checks of the direction-law constants.
    Validate(ValidateArgs),
    /// Print the manifest of a problem suite.
    List(ListArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Plan file with `key = value` lines; flags override its values.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Problem suite (smoke, nonconvex, convex, strongly_convex, profile_convex, all).
    #[arg(long)]
    pub suite: Option<String>,
    /// Method string `method:sampler:schedule:params`; repeatable.
    #[arg(long = "method", allow_hyphen_values = true)]
    pub methods: Vec<String>,
    /// Target tolerance; repeatable or comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Vec<String>,
    /// Replicates per (problem, method) pair.
    #[arg(long, allow_hyphen_values = true)]
    pub seeds: Option<String>,
    /// Evaluation budget per run.
    #[arg(long, allow_hyphen_values = true)]
    pub max_evals: Option<String>,
    /// Master seed from which every run seed is derived.
    #[arg(long, allow_hyphen_values = true)]
    pub master_seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads (default: one per core). Does not affect results.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Keep every n-th trace row plus the last one.
    #[arg(long, default_value_t = 1)]
    pub trace_stride: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records file written by `run` (default: `<out>/records.csv`).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Output directory for profiles and the summary.
    #[arg(long, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dimensions, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 10, 50])]
    pub n: Vec<usize>,
    /// Direction laws, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = VALIDATION_LAWS.map(String::from).to_vec())]
    pub laws: Vec<String>,
    /// Monte-Carlo samples per estimate.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write `validation.csv` into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Run(args) => run_command(args),
        Command::Report(args) => {
            let records_path = args.records.unwrap_or_else(|| args.out.join("records.csv"));
            let records = read_records(&records_path)?;
            print!("{}", report(&records, &args.out)?);
            Ok(0)
        }
        Command::Validate(args) => {
            let r = validate_assumptions(&args.n, &args.laws, args.samples, args.seed)?;
            print!("{}", r.to_text());
            if let Some(dir) = args.out {
                create_dir(&dir)?;
                write_file(&dir.join("validation.csv"), &r.to_csv())?;
            }
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::List(args) => {
            let problems = suite_load(&args.suite)
                .map_err(|e| HarnessError::config("suite", e.to_string()))?;
            print!("{}", manifest_csv(&problems));
            Ok(0)
        }
    }
}

fn run_command(args: RunArgs) -> Result<u8> {
    let file = match &args.plan {
        Some(path) => PlanInput::from_file(path)?,
        None => PlanInput::default(),
    };
    let flags = PlanInput {
        suite: args.suite,
        methods: args.methods,
        eps: args.eps,
        seeds: args.seeds,
        max_evals: args.max_evals,
        master_seed: args.master_seed,
        out: args.out,
    };
    let plan = file.overlay(flags).into_plan()?;
    create_dir(&plan.out_dir)?;
    write_file(&plan.out_dir.join("plan.txt"), &plan.to_text())?;
    let opts = ExecOptions {
        jobs: args.jobs,
        trace_stride: args.trace_stride,
    };
    let output = run_matrix(&plan, opts)?;
    log::info!(
        "{} runs, {} records, {} skipped pairs written to {}",
        output.runs.len(),
        output.records.len(),
        output.skipped.len(),
        plan.out_dir.display()
    );
    if output.records.is_empty() {
        return Err(HarnessError::config(
            "method",
            "every (problem, method) pair was skipped",
        ));
    }
    print!("{}", report(&output.records, &plan.out_dir)?);
    Ok(0)
}
