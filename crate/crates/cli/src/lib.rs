//! Command-line driver: `run`, `suite`, `certify` and `list-gallery`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sgm_core::harness::{
    certify, run_suite, write_atomic, write_outputs, Method, ProblemSource, RunConfig, ScheduleChoice, Tolerances,
};
use sgm_core::oracles::gallery_names;
use sgm_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sgm", version, about = "Subgradient methods with dual step-size control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one method on one problem and write its trace and summary.
    Run(Box<RunArgs>),
    /// Run the acceptance experiments.
    Suite {
        /// Only experiments whose name contains this string (or whose number equals it).
        #[arg(long)]
        filter: Option<String>,
        /// Also write the reports as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recompute the multipliers and dual certificate of a stored run.
    Certify {
        /// Path of a `<stem>.summary.json` written by `run`.
        summary: PathBuf,
    },
    /// List the built-in problems.
    ListGallery,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run configuration as JSON; the other run flags are then ignored.
    #[arg(long, conflicts_with_all = ["gallery", "problem"])]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "problem")]
    gallery: Option<String>,
    /// Seed of randomized gallery problems.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Problem file (JSON, see docs/format.md).
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    /// `constant` or `inverse-sqrt`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    /// Examine every constraint instead of stopping at the first selected one.
    #[arg(long)]
    exhaustive: bool,
    /// Estimate multipliers at dyadic checkpoints.
    #[arg(long)]
    checkpoints: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// File name stem; defaults to `<problem>-<method>`.
    #[arg(long)]
    stem: Option<String>,
}

/// Exit code for an error raised while configuring or running.
fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::UnknownProblem(_)
        | Error::Capability(_)
        | Error::HorizonTooShort { .. }
        | Error::Schedule(_)
        | Error::Dimension { .. } => EXIT_CONFIG,
        _ => EXIT_FAILED,
    }
}

fn report_error(err: &mut dyn Write, e: &Error) -> i32 {
    let key = match e {
        Error::Config { key, .. } => format!(" [key: {key}]"),
        Error::HorizonTooShort { .. } => " [key: iters]".to_string(),
        Error::UnknownProblem(_) => " [key: gallery]".to_string(),
        Error::Capability(_) => " [key: method]".to_string(),
        _ => String::new(),
    };
    let _ = writeln!(err, "error: {e}{key}");
    error_code(e)
}

fn config_from_args(a: &RunArgs) -> Result<RunConfig, Error> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        return RunConfig::from_json(&text);
    }
    let problem = match (&a.gallery, &a.problem) {
        (Some(name), None) => ProblemSource::Gallery { name: name.clone(), seed: a.seed },
        (None, Some(path)) => ProblemSource::File { path: path.clone() },
        _ => return Err(Error::Config { key: "problem".into(), message: "pass --gallery or --problem".into() }),
    };
    let method = Method::parse(
        a.method
            .as_deref()
            .ok_or_else(|| Error::Config { key: "method".into(), message: "missing".into() })?,
    )?;
    let iters = a.iters.ok_or_else(|| Error::Config { key: "iters".into(), message: "missing".into() })?;
    let mut cfg = RunConfig::new(problem, method, iters);
    cfg.schedule = match a.schedule.as_deref() {
        None => None,
        Some("constant") => Some(ScheduleChoice::Constant),
        Some("inverse-sqrt") => Some(ScheduleChoice::InverseSqrt),
        Some(other) => {
            return Err(Error::Config {
                key: "schedule".into(),
                message: format!("expected `constant` or `inverse-sqrt`, got `{other}`"),
            })
        }
    };
    cfg.d = a.d;
    cfg.d0 = a.d0;
    cfg.eps = a.eps;
    cfg.r0 = a.r0;
    cfg.exhaustive = a.exhaustive;
    cfg.checkpoints = a.checkpoints;
    Ok(cfg)
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = config_from_args(a).and_then(|cfg| {
        let (problem, run) = cfg.execute()?;
        let stem = a.stem.clone().unwrap_or_else(|| format!("{}-{}", sanitize(&problem.name), cfg.method.name()));
        write_outputs(&a.out, &stem, &cfg, &problem, &run)
    });
    match result {
        Ok((trace, summary_path, summary)) => {
            let _ = writeln!(out, "trace: {}", trace.display());
            let _ = writeln!(out, "summary: {}", summary_path.display());
            let _ = writeln!(out, "iterations: {} ({})", summary.iterations, summary.termination);
            if let Some(best) = summary.best {
                let _ = writeln!(out, "best objective: {best:.17e}");
            }
            if let Some(c) = &summary.certificate {
                let _ = writeln!(out, "dual value: {:?}, gap: {:?}, bound: {:?}", c.dual_value, c.gap, c.gap_bound);
            }
            if let Some(e) = &summary.certificate_error {
                let _ = writeln!(out, "certificate: {e}");
            }
            EXIT_OK
        }
        Err(e) => report_error(err, &e),
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn cmd_suite(filter: Option<&str>, report: Option<&PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let tol = Tolerances::default();
    let _ = writeln!(out, "tolerances (version {}): {}", tol.version, serde_json::to_string(&tol).unwrap_or_default());
    let reports = match run_suite(filter) {
        Ok(r) => r,
        Err(e) => return report_error(err, &e),
    };
    for r in &reports {
        let _ = writeln!(out, "{}", r.line());
        for d in &r.details {
            let _ = writeln!(out, "    {d}");
        }
    }
    if let Some(path) = report {
        let doc = serde_json::json!({ "tolerances": tol, "experiments": reports });
        let bytes = serde_json::to_vec_pretty(&doc).unwrap_or_default();
        if let Err(e) = write_atomic(path, &bytes) {
            return report_error(err, &e);
        }
    }
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn cmd_certify(summary: &std::path::Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match certify(summary) {
        Ok(r) => {
            let _ = writeln!(out, "stored:     {:?}", r.stored);
            let _ = writeln!(out, "recomputed: {:?}", r.recomputed);
            let _ = writeln!(out, "multipliers match: {}", r.multipliers_match);
            if r.matches {
                let _ = writeln!(out, "certificate reproduced exactly");
                EXIT_OK
            } else {
                let _ = writeln!(err, "certificate mismatch");
                EXIT_FAILED
            }
        }
        Err(e) => report_error(err, &e),
    }
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Suite { filter, report } => cmd_suite(filter.as_deref(), report.as_ref(), out, err),
        Command::Certify { summary } => cmd_certify(summary, out, err),
        Command::ListGallery => {
            for name in gallery_names() {
                let _ = writeln!(out, "{name}");
            }
            EXIT_OK
        }
    }
}

/// [`run_cli_with`] on the process's standard streams.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
