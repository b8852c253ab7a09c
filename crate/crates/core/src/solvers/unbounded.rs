//! Switching method for constrained problems on possibly unbounded sets.

use super::{IterationRecord, RunResult, StepKind, Termination};
use crate::dualcert::aggregate;
use crate::error::{Error, Result};
use crate::oracles::ProblemInstance;
use crate::proxmaps::solve_phi_equation;
use crate::schedules::GammaSchedule;

/// Runs `n` iterations with accuracy `eps` and scale `d0`.
///
/// At step `k` the query point is `y_k = (1 − τ_k)x₀ + τ_k x_k` with
/// `τ_k = γ_k/γ_{k+1}`; the step uses the first constraint with
/// `f_i(y_k) ≥ ε` (or the objective), and its weight `a_k` solves
/// `φ_{y_k}(a_k/γ_{k+1}) = (1 − τ_k)·d0`.
pub fn run_unbounded(problem: &ProblemInstance, gamma: &GammaSchedule, d0: f64, eps: f64, n: usize) -> Result<RunResult> {
    problem.validate()?;
    if !(d0 > 0.0) || !d0.is_finite() {
        return Err(Error::config("d0", "must be finite and positive"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::config("eps", "must be finite and positive"));
    }
    let m = problem.constraints.len();
    let domain = problem.domain()?;
    let geom = &problem.geometry;
    let x0 = &problem.x0;
    let mut x = x0.clone();
    let mut trace = Vec::with_capacity(n);
    let mut termination = Termination::Completed;
    for k in 0..n {
        let (gk, gk1) = (gamma.gamma(k)?, gamma.gamma(k + 1)?);
        let tau = gk / gk1;
        let y = x0 * (1.0 - tau) + &x * tau;
        let values = problem.constraint_values(&y);
        let selected = values.iter().position(|&v| v >= eps);
        let (step_kind, g) = match selected {
            Some(i) => (StepKind::Constraint(i + 1), problem.constraints[i].eval(&y).1),
            None => (StepKind::Objective, problem.objective.eval(&y).subgradient),
        };
        let step = match solve_phi_equation(geom, &domain, &y, &g, (1.0 - tau) * d0) {
            Ok(s) => s,
            Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) if selected.is_some() => {
                return Err(Error::InfeasibleLevel(format!(
                    "constraint {} exceeds eps at a minimizer of its linearization",
                    step_kind.index()
                )))
            }
            Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) => {
                termination = Termination::DirectionallyOptimal { k };
                break;
            }
            Err(e) => return Err(e),
        };
        trace.push(IterationRecord {
            k,
            step: step_kind,
            h: f64::NAN,
            scale: gk,
            lambda: step.lambda,
            weight: step.lambda * gk1,
            f0: problem.f0(&y),
            max_fi: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            composite: problem.f0(&y),
            breg_step: geom.bregman(&x, &step.point)?,
            grad_norm: geom.dual_norm(&g),
            delta: None,
            point: y,
            next: step.point.clone(),
        });
        x = step.point;
    }
    let multipliers = aggregate(&trace, (0, n), m);
    let best = multipliers.best_objective;
    Ok(RunResult { trace, termination, window: Some((0, n)), best, multipliers: Some(multipliers), checkpoints: Vec::new() })
}
