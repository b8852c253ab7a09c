//! Run configuration and single-run execution.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::problem_file::load_problem;
use crate::dualcert::{certificate_from_estimate, DualCertificate};
use crate::error::{Error, Result};
use crate::oracles::{gallery_with_seed, CompositeTerm, ProblemInstance};
use crate::schedules::{GammaSchedule, ScheduleKind, StepSchedule};
use crate::solvers::{
    run_basic, run_composite_known_opt, run_double_step, run_switching_i, run_switching_ii, run_unbounded,
    MultiplierMode, RunResult, SelectionMode, SwitchingOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Basic,
    Composite,
    DoubleStep,
    Switch1,
    Switch2,
    Unbounded,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Basic, Method::Composite, Method::DoubleStep, Method::Switch1, Method::Switch2, Method::Unbounded];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Basic => "basic",
            Method::Composite => "composite",
            Method::DoubleStep => "double-step",
            Method::Switch1 => "switch1",
            Method::Switch2 => "switch2",
            Method::Unbounded => "unbounded",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ProblemSource {
    Gallery { name: String, seed: u64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleChoice {
    /// `τ_k = 1/√(N+1)` with `N` the iteration count minus one.
    Constant,
    InverseSqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub method: Method,
    pub iters: usize,
    /// Defaults to constant for the basic method and inverse-sqrt otherwise.
    #[serde(default)]
    pub schedule: Option<ScheduleChoice>,
    /// Bregman diameter bound `D`; defaults to the instance truth.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub d0: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Step scale of the basic method; defaults to `‖x₀ − x*‖` or `√(2D)`.
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub checkpoints: bool,
}

impl RunConfig {
    pub fn new(problem: ProblemSource, method: Method, iters: usize) -> Self {
        RunConfig {
            problem,
            method,
            iters,
            schedule: None,
            d: None,
            d0: None,
            eps: None,
            r0: None,
            exhaustive: false,
            checkpoints: false,
        }
    }

    /// Parses a configuration; errors carry the offending key path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))
    }

    pub fn load_problem(&self) -> Result<ProblemInstance> {
        match &self.problem {
            ProblemSource::Gallery { name, seed } => gallery_with_seed(name, *seed),
            ProblemSource::File { path } => load_problem(path),
        }
    }

    fn diameter(&self, problem: &ProblemInstance) -> Result<f64> {
        self.d
            .or(problem.truth.d)
            .ok_or_else(|| Error::config("d", "the problem declares no diameter bound D; pass one explicitly"))
    }

    /// Step schedule for the bounded methods.
    pub fn step_schedule(&self, problem: &ProblemInstance) -> Result<StepSchedule> {
        let choice = self.schedule.unwrap_or(match self.method {
            Method::Basic => ScheduleChoice::Constant,
            _ => ScheduleChoice::InverseSqrt,
        });
        let kind = match choice {
            ScheduleChoice::Constant => ScheduleKind::Constant { horizon: self.iters.saturating_sub(1) },
            ScheduleChoice::InverseSqrt => ScheduleKind::InverseSqrt,
        };
        let scale = match self.method {
            Method::Basic => match (self.r0, &problem.truth.xstar) {
                (Some(r), _) => r,
                (None, Some(xs)) => problem.geometry.norm(&(&problem.x0 - xs)),
                (None, None) => (2.0 * self.diameter(problem)?).sqrt(),
            },
            _ => (2.0 * self.diameter(problem)?).sqrt(),
        };
        StepSchedule::new(kind, scale)
    }

    fn unbounded_params(&self, problem: &ProblemInstance) -> Result<(f64, f64)> {
        let d0 = self
            .d0
            .or(problem.truth.d0)
            .ok_or_else(|| Error::config("d0", "the unbounded method needs D0"))?;
        let eps = self.eps.ok_or_else(|| Error::config("eps", "the unbounded method needs eps"))?;
        Ok((d0, eps))
    }

    /// Rejects method/problem pairs outside the capability matrix.
    pub fn check_compatibility(&self, problem: &ProblemInstance) -> Result<()> {
        problem.validate()?;
        let indicator_only = matches!(problem.psi, CompositeTerm::Zero | CompositeTerm::Indicator(_));
        let constrained = !problem.constraints.is_empty();
        let fail = |msg: &str| Err(Error::Capability(format!("{}: {msg}", self.method.name())));
        match self.method {
            Method::Basic if !indicator_only => fail("needs ψ = 0 or an indicator"),
            Method::Composite if problem.truth.fstar.is_none() => fail("needs the optimal value F*"),
            Method::DoubleStep if !constrained => fail("needs constraints"),
            Method::Switch1 | Method::Switch2 if !constrained || !indicator_only => {
                fail("needs constraints and ψ = 0 or an indicator")
            }
            Method::Unbounded if !constrained || !indicator_only => fail("needs constraints and ψ = 0 or an indicator"),
            _ => Ok(()),
        }?;
        if self.iters == 0 && !matches!(self.method, Method::DoubleStep | Method::Switch1 | Method::Switch2) {
            return Err(Error::config("iters", "must be positive"));
        }
        Ok(())
    }

    pub fn gamma(&self) -> GammaSchedule {
        GammaSchedule::Sqrt
    }

    /// Loads the problem, validates the configuration and runs the method.
    pub fn execute(&self) -> Result<(ProblemInstance, RunResult)> {
        let problem = self.load_problem()?;
        self.check_compatibility(&problem)?;
        let opts = SwitchingOptions {
            selection: if self.exhaustive { SelectionMode::Exhaustive } else { SelectionMode::Lazy },
            multipliers: if self.checkpoints { MultiplierMode::Checkpoint } else { MultiplierMode::Full },
        };
        let n = self.iters;
        let run = match self.method {
            Method::Basic => run_basic(&problem, &self.step_schedule(&problem)?, n)?,
            Method::Composite => run_composite_known_opt(&problem, n)?,
            Method::DoubleStep => run_double_step(&problem, &self.step_schedule(&problem)?, n)?,
            Method::Switch1 => run_switching_i(&problem, &self.step_schedule(&problem)?, n, opts)?,
            Method::Switch2 => run_switching_ii(&problem, &self.step_schedule(&problem)?, n, opts)?,
            Method::Unbounded => {
                let (d0, eps) = self.unbounded_params(&problem)?;
                run_unbounded(&problem, &self.gamma(), d0, eps, n)?
            }
        };
        Ok((problem, run))
    }

    /// Restriction `D` used for the dual function of the unbounded method.
    pub fn dual_restriction(&self, problem: &ProblemInstance) -> Option<f64> {
        match self.method {
            Method::Unbounded if !problem.set.is_bounded() => self.d.or(problem.truth.d),
            _ => None,
        }
    }

    /// Certificate for a multiplier-producing run, computed only from trace values.
    pub fn certificate(&self, problem: &ProblemInstance, run: &RunResult) -> Option<Result<DualCertificate>> {
        let est = run.multipliers.as_ref()?;
        Some(certificate_from_estimate(problem, est, &run.trace, self.dual_restriction(problem)))
    }
}
