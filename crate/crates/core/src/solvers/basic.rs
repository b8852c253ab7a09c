//! Unconstrained drivers: the basic method, the composite method with a known
//! optimal value, and the classical projected step used as a comparator.

use super::{proximity, require, IterationRecord, RunResult, StepKind, Termination};
use crate::error::{Error, Result};
use crate::oracles::ProblemInstance;
use crate::proxmaps::{known_optimum_step, solve_phi_equation};
use crate::schedules::StepSchedule;

/// Basic method: `x_{k+1} = T_{x_k}(λ_k)` with `φ_{x_k}(λ_k) = ½h_k²`, for `n` iterations.
pub fn run_basic(problem: &ProblemInstance, schedule: &StepSchedule, n: usize) -> Result<RunResult> {
    problem.validate()?;
    let domain = problem.domain()?;
    let geom = &problem.geometry;
    let xstar = problem.truth.xstar.as_ref();
    let mut x = problem.x0.clone();
    let mut trace = Vec::with_capacity(n);
    let mut termination = Termination::Completed;
    for k in 0..n {
        let h = schedule.h(k)?;
        let e = problem.objective.eval(&x);
        let step = match solve_phi_equation(geom, &domain, &x, &e.subgradient, 0.5 * h * h) {
            Ok(s) => s,
            Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) => {
                termination = Termination::DirectionallyOptimal { k };
                break;
            }
            Err(err) => return Err(err),
        };
        trace.push(IterationRecord {
            k,
            step: StepKind::Objective,
            h,
            scale: schedule.tau(k)?,
            lambda: step.lambda,
            weight: step.lambda,
            delta: proximity(geom, &e.subgradient, &x, &step.point, xstar),
            grad_norm: geom.dual_norm(&e.subgradient),
            point: x.clone(),
            f0: e.value,
            max_fi: f64::NAN,
            composite: e.value,
            breg_step: step.breg,
            next: step.point.clone(),
        });
        x = step.point;
    }
    let best = trace.iter().map(|r| r.f0).reduce(f64::min);
    Ok(RunResult { trace, termination, window: None, best, multipliers: None, checkpoints: Vec::new() })
}

/// Composite method with the known-optimum rule: each step projects onto
/// `{x : ℓ_{x_k}(x) + ψ(x) ≤ F*}`.
pub fn run_composite_known_opt(problem: &ProblemInstance, n: usize) -> Result<RunResult> {
    problem.validate()?;
    let fstar = problem
        .truth
        .fstar
        .ok_or_else(|| Error::Capability("the composite method needs the optimal value F*".into()))?;
    let geom = &problem.geometry;
    let mut x = problem.x0.clone();
    let mut trace = Vec::with_capacity(n);
    for k in 0..n {
        let e = problem.objective.eval(&x);
        let step = known_optimum_step(problem, &x, fstar)?;
        trace.push(IterationRecord {
            k,
            step: StepKind::Objective,
            h: f64::NAN,
            scale: f64::NAN,
            lambda: step.lambda,
            weight: step.lambda,
            delta: None,
            grad_norm: geom.dual_norm(&e.subgradient),
            point: x.clone(),
            f0: e.value,
            max_fi: f64::NAN,
            composite: problem.composite_value(&x),
            breg_step: step.breg,
            next: step.point.clone(),
        });
        x = step.point;
    }
    let best = trace.iter().map(|r| r.composite).reduce(f64::min);
    Ok(RunResult {
        trace,
        termination: Termination::Completed,
        window: None,
        best,
        multipliers: None,
        checkpoints: Vec::new(),
    })
}

/// Classical rule `x_{k+1} = π[x_k − (F(x_k) − F*) g/‖g‖²_*]` in a Euclidean geometry.
pub fn run_polyak_projected(problem: &ProblemInstance, n: usize) -> Result<RunResult> {
    problem.validate()?;
    let metric = problem
        .geometry
        .metric()
        .ok_or_else(|| Error::Capability("the projected comparator needs a Euclidean geometry".into()))?;
    let fstar = problem
        .truth
        .fstar
        .ok_or_else(|| Error::Capability("the projected comparator needs F*".into()))?;
    let domain = problem.domain()?;
    require(matches!(problem.psi, crate::oracles::CompositeTerm::Zero | crate::oracles::CompositeTerm::Indicator(_)),
        "the projected comparator handles indicator terms only")?;
    let mut x = problem.x0.clone();
    let mut trace = Vec::with_capacity(n);
    for k in 0..n {
        let e = problem.objective.eval(&x);
        let gap = e.value - fstar;
        let gsq = metric.dual_norm_sq(&e.subgradient);
        let next = if gap <= 0.0 || gsq == 0.0 {
            x.clone()
        } else {
            domain.project(metric, &(&x - metric.apply_inv(&e.subgradient) * (gap / gsq)))?
        };
        trace.push(IterationRecord {
            k,
            step: StepKind::Objective,
            h: f64::NAN,
            scale: f64::NAN,
            lambda: if gsq > 0.0 { gap.max(0.0) / gsq } else { 0.0 },
            weight: f64::NAN,
            delta: None,
            grad_norm: gsq.sqrt(),
            point: x.clone(),
            f0: e.value,
            max_fi: f64::NAN,
            composite: e.value,
            breg_step: problem.geometry.bregman(&x, &next)?,
            next: next.clone(),
        });
        x = next;
    }
    let best = trace.iter().map(|r| r.f0).reduce(f64::min);
    Ok(RunResult {
        trace,
        termination: Termination::Completed,
        window: None,
        best,
        multipliers: None,
        checkpoints: Vec::new(),
    })
}
