//! Run orchestration: configurations, problem files, trace and summary
//! files, certificate replay and the acceptance suite.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

mod brute;
mod config;
pub mod problem_file;
pub mod suite;

pub use config::{Method, ProblemSource, RunConfig, ScheduleChoice};
pub use problem_file::{load_problem, parse_problem};
pub use suite::{run_experiment, run_suite, unbounded_threshold, strongly_convex_instances, ExperimentReport, Tolerances, EXPERIMENTS};

use crate::dualcert::{aggregate, certificate_from_estimate, DualCertificate};
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::solvers::{IterationRecord, RunResult, StepKind, Termination};

pub const FORMAT_VERSION: u32 = 1;
const FIXED_COLUMNS: [&str; 10] =
    ["k", "step_kind", "i_k", "h_k", "tau_or_gamma", "lambda_k", "f0", "max_fi", "F", "breg_step"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Writes the trace as CSV; the coordinates are those of `x_{k+1}`.
pub fn write_trace<W: std::io::Write>(out: W, trace: &[IterationRecord], dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=dim).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in trace {
        let mut row = vec![
            r.k.to_string(),
            r.step.label().to_string(),
            r.step.index().to_string(),
            num(r.h),
            num(r.scale),
            num(r.lambda),
            num(r.f0),
            num(r.max_fi),
            num(r.composite),
            num(r.breg_step),
        ];
        row.extend(r.next.iter().map(|v| num(*v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Reads a trace written by [`write_trace`]. Query points are taken as the
/// previous iterate (starting from `x0`); step weights are recomputed from
/// `λ_k` by `weight`.
pub fn read_trace<R: std::io::Read>(
    input: R,
    x0: &Vector,
    weight: impl Fn(&IterationRecord) -> Result<f64>,
) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let dim = x0.len();
    if header.len() != FIXED_COLUMNS.len() + dim || FIXED_COLUMNS.iter().zip(header.iter()).any(|(a, b)| *a != b) {
        return Err(Error::config("trace", format!("unexpected header for dimension {dim}")));
    }
    let mut out = Vec::new();
    let mut prev = x0.clone();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let key = |c: usize| format!("trace row {} column {}", line + 1, FIXED_COLUMNS.get(c).copied().unwrap_or("x"));
        let f = |c: usize| -> Result<f64> { row[c].parse::<f64>().map_err(|e| Error::config(key(c), e.to_string())) };
        let u = |c: usize| -> Result<usize> { row[c].parse::<usize>().map_err(|e| Error::config(key(c), e.to_string())) };
        let next = Vector::from_iterator(dim, (0..dim).map(|j| f(FIXED_COLUMNS.len() + j)).collect::<Result<Vec<_>>>()?);
        let mut rec = IterationRecord {
            k: u(0)?,
            step: StepKind::parse(&row[1], u(2)?)?,
            h: f(3)?,
            scale: f(4)?,
            lambda: f(5)?,
            weight: f64::NAN,
            point: prev.clone(),
            next: next.clone(),
            f0: f(6)?,
            max_fi: f(7)?,
            composite: f(8)?,
            breg_step: f(9)?,
            grad_norm: f64::NAN,
            delta: None,
        };
        rec.weight = weight(&rec)?;
        prev = next;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub window: (usize, usize),
    pub sigma: Vec<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub weighted_objective: Option<f64>,
    pub best_objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub lambdas: Vec<f64>,
    /// Absent when the Lagrangian is unbounded below.
    pub dual_value: Option<f64>,
    pub restricted: bool,
    pub primal_best: f64,
    pub weighted_objective: f64,
    pub gap: Option<f64>,
    pub weighted_gap: Option<f64>,
    pub gap_bound: Option<f64>,
    pub optimality_bound: Option<f64>,
    pub empirical_objective_bound: bool,
}

impl From<&DualCertificate> for CertificateReport {
    fn from(c: &DualCertificate) -> Self {
        CertificateReport {
            lambdas: c.lambdas.clone(),
            dual_value: finite(c.dual_value),
            restricted: c.restricted,
            primal_best: c.primal_best,
            weighted_objective: c.weighted_objective,
            gap: finite(c.gap),
            weighted_gap: finite(c.weighted_gap),
            gap_bound: c.gap_bound,
            optimality_bound: c.optimality_bound,
            empirical_objective_bound: c.empirical_objective_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub format_version: u32,
    pub config: RunConfig,
    pub problem: String,
    pub dimension: usize,
    pub iterations: usize,
    pub termination: String,
    pub termination_k: Option<usize>,
    pub best: Option<f64>,
    pub final_point: Option<Vec<f64>>,
    pub window: Option<(usize, usize)>,
    pub multipliers: Option<MultiplierReport>,
    pub certificate: Option<CertificateReport>,
    pub certificate_error: Option<String>,
    /// Preconditions of the run's guarantees that were not checked.
    pub assumptions: Vec<String>,
    pub tolerances: Tolerances,
    /// Trace file name, relative to the summary's directory.
    pub trace_file: String,
}

fn assumptions(cfg: &RunConfig) -> Vec<String> {
    match cfg.method {
        Method::Unbounded => vec![
            "Σ_N > (ρ₀ + D₀)·M/(√(2D₀)·ε) with ρ₀ = min over the feasible set of β(x₀, y) is assumed".into(),
        ],
        _ => Vec::new(),
    }
}

impl Summary {
    pub fn build(cfg: &RunConfig, problem: &crate::oracles::ProblemInstance, run: &RunResult, trace_file: &str) -> Self {
        let (certificate, certificate_error) = match cfg.certificate(problem, run) {
            Some(Ok(c)) => (Some(CertificateReport::from(&c)), None),
            Some(Err(e)) => (None, Some(e.to_string())),
            None => (None, None),
        };
        let (termination, termination_k) = match run.termination {
            Termination::Completed => ("completed".to_string(), None),
            Termination::DirectionallyOptimal { k } => ("directionally-optimal".to_string(), Some(k)),
        };
        Summary {
            format_version: FORMAT_VERSION,
            config: cfg.clone(),
            problem: problem.name.clone(),
            dimension: problem.dim(),
            iterations: run.trace.len(),
            termination,
            termination_k,
            best: run.best.and_then(finite),
            final_point: run.final_point().map(|x| x.iter().copied().collect()),
            window: run.window,
            multipliers: run.multipliers.as_ref().map(|e| MultiplierReport {
                window: e.window,
                sigma: e.sigma.clone(),
                lambdas: e.lambdas.clone(),
                weighted_objective: e.weighted_objective,
                best_objective: e.best_objective,
            }),
            certificate,
            certificate_error,
            assumptions: assumptions(cfg),
            tolerances: Tolerances::default(),
            trace_file: trace_file.to_string(),
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// Writes `<stem>.trace.csv` and `<stem>.summary.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    cfg: &RunConfig,
    problem: &crate::oracles::ProblemInstance,
    run: &RunResult,
) -> Result<(PathBuf, PathBuf, Summary)> {
    let trace_name = format!("{stem}.trace.csv");
    let trace_path = dir.join(&trace_name);
    let summary_path = dir.join(format!("{stem}.summary.json"));
    let mut buf = Vec::new();
    write_trace(&mut buf, &run.trace, problem.dim())?;
    write_atomic(&trace_path, &buf)?;
    let summary = Summary::build(cfg, problem, run, &trace_name);
    let json = serde_json::to_vec_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&summary_path, &json)?;
    Ok((trace_path, summary_path, summary))
}

/// Outcome of replaying a stored run.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub stored: Option<CertificateReport>,
    pub recomputed: Option<CertificateReport>,
    pub multipliers_match: bool,
    pub matches: bool,
}

/// Recomputes the multiplier estimate and dual certificate of a stored run
/// from its trace file and compares them with the summary.
pub fn certify(summary_path: &Path) -> Result<CertifyReport> {
    let text = std::fs::read_to_string(summary_path).map_err(|e| Error::Io(format!("{}: {e}", summary_path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let summary: Summary = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::config(format!("summary.{}", e.path()), e.into_inner().to_string()))?;
    let cfg = &summary.config;
    let problem = cfg.load_problem()?;
    let dir = summary_path.parent().unwrap_or(Path::new("."));
    let trace_file = std::fs::File::open(dir.join(&summary.trace_file))?;
    let gamma = cfg.gamma();
    let unbounded = cfg.method == Method::Unbounded;
    let trace = read_trace(trace_file, &problem.x0, |r| {
        if unbounded {
            Ok(r.lambda * gamma.gamma(r.k + 1)?)
        } else {
            Ok(r.lambda)
        }
    })?;
    let Some(window) = summary.window.filter(|_| summary.multipliers.is_some()) else {
        return Ok(CertifyReport { stored: None, recomputed: None, multipliers_match: true, matches: summary.certificate.is_none() });
    };
    let est = if cfg.checkpoints {
        aggregate(&trace, summary.multipliers.as_ref().map_or(window, |m| m.window), problem.constraints.len())
    } else {
        aggregate(&trace, window, problem.constraints.len())
    };
    let multipliers_match = summary.multipliers.as_ref().is_some_and(|m| {
        m.sigma == est.sigma
            && m.lambdas == est.lambdas
            && m.weighted_objective == est.weighted_objective
            && m.best_objective == est.best_objective
    });
    let recomputed = match certificate_from_estimate(&problem, &est, &trace, cfg.dual_restriction(&problem)) {
        Ok(c) => Some(CertificateReport::from(&c)),
        Err(_) => None,
    };
    let matches = multipliers_match && recomputed == summary.certificate;
    Ok(CertifyReport { stored: summary.certificate, recomputed, multipliers_match, matches })
}
