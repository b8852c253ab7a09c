//! Methods for functional constraints on a bounded set: the double-step
//! method and the two switching rules.

use super::{proximity, require, IterationRecord, RunResult, StepKind, Termination};
use crate::dualcert::{aggregate, MultiplierEstimate, MultiplierSums};
use crate::error::{Error, Result};
use crate::oracles::{CompositeTerm, ProblemInstance};
use crate::proxmaps::{level_projection, linearized_constraint_projection, solve_phi_equation};
use crate::schedules::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// Skip satisfied constraints and stop at the first selected one.
    #[default]
    Lazy,
    /// Evaluate the test for every constraint before selecting.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierMode {
    /// Aggregate over the final window `[k(N), N)` from the stored trace.
    #[default]
    Full,
    /// Keep running sums from `k(N_q)` for every `N_q = 2^q ≤ N`.
    Checkpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwitchingOptions {
    pub selection: SelectionMode,
    pub multipliers: MultiplierMode,
}

fn check_constrained(problem: &ProblemInstance, method: &str) -> Result<()> {
    problem.validate()?;
    require(!problem.constraints.is_empty(), &format!("the {method} needs at least one constraint"))?;
    require(
        matches!(problem.psi, CompositeTerm::Zero | CompositeTerm::Indicator(_)),
        &format!("the {method} handles indicator composite terms only"),
    )
}

/// Double-step method: project onto the linearized constraint set, accept the
/// projection if it moved far enough, otherwise take an objective step from it.
pub fn run_double_step(problem: &ProblemInstance, schedule: &StepSchedule, n: usize) -> Result<RunResult> {
    problem.validate()?;
    require(!problem.constraints.is_empty(), "the double-step method needs at least one constraint")?;
    let start = schedule.window_start(n)?;
    let domain = problem.domain()?;
    let geom = &problem.geometry;
    let xstar = problem.truth.xstar.as_ref();
    let fmax = problem.constraint_max();
    let c = problem.psi.linear_part(problem.dim());
    let mut x = problem.x0.clone();
    let mut trace = Vec::with_capacity(n);
    let mut termination = Termination::Completed;
    for k in 0..n {
        let h = schedule.h(k)?;
        let proj = level_projection(geom, &domain, &fmax.linearize(&x), &c, 0.0)?;
        let y = proj.point.clone();
        let f0 = problem.objective.eval(&y);
        let mut record = IterationRecord {
            k,
            step: StepKind::DoubleStepA,
            h,
            scale: schedule.tau(k)?,
            lambda: proj.lambda,
            weight: proj.lambda,
            point: y.clone(),
            next: y.clone(),
            f0: f0.value,
            max_fi: problem.max_constraint(&y),
            composite: problem.semi_composite_constraint(&y),
            breg_step: proj.breg,
            grad_norm: f64::NAN,
            delta: None,
        };
        if proj.breg < 0.5 * h * h {
            let step = match solve_phi_equation(geom, &domain, &y, &f0.subgradient, 0.5 * h * h) {
                Ok(s) => s,
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) if record.composite <= 0.0 => {
                    termination = Termination::DirectionallyOptimal { k };
                    break;
                }
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) => crate::proxmaps::ProxStepResult {
                    point: y.clone(),
                    lambda: 0.0,
                    phi: 0.0,
                    derivative: 0.0,
                    breg: 0.0,
                    displacement: 0.0,
                },
                Err(e) => return Err(e),
            };
            record.step = StepKind::DoubleStepB;
            record.lambda = step.lambda;
            record.weight = step.lambda;
            record.grad_norm = geom.dual_norm(&f0.subgradient);
            record.delta = proximity(geom, &f0.subgradient, &y, &step.point, xstar);
            record.breg_step = geom.bregman(&x, &step.point)?;
            record.next = step.point;
        }
        x = record.next.clone();
        trace.push(record);
    }
    let best = trace
        .iter()
        .filter(|r| r.k >= start && r.step == StepKind::DoubleStepB)
        .map(|r| r.f0)
        .reduce(f64::min);
    Ok(RunResult { trace, termination, window: Some((start, n)), best, multipliers: None, checkpoints: Vec::new() })
}

enum Choice {
    Constraint { index: usize, lambda: f64, next: crate::geometry::Vector, grad_norm: f64, breg: f64 },
    Objective,
}

/// Switching rule I: step on the lowest-indexed violated constraint whose
/// linearized projection moves at least `h_k` in Bregman terms.
pub fn run_switching_i(
    problem: &ProblemInstance,
    schedule: &StepSchedule,
    n: usize,
    opts: SwitchingOptions,
) -> Result<RunResult> {
    check_constrained(problem, "first switching method")?;
    let domain = problem.domain()?;
    let geom = problem.geometry.clone();
    run_switching(problem, schedule, n, opts, |x, h| {
        let mut chosen = None;
        for (idx, f) in problem.constraints.iter().enumerate() {
            let (value, g) = f.eval(x);
            if value <= 0.0 && opts.selection == SelectionMode::Lazy {
                continue;
            }
            let (proj, lambda) = linearized_constraint_projection(&geom, &domain, x, value, &g)?;
            if chosen.is_none() && value > 0.0 && proj.breg >= 0.5 * h * h {
                chosen = Some(Choice::Constraint {
                    index: idx + 1,
                    lambda,
                    next: proj.point,
                    grad_norm: geom.dual_norm(&g),
                    breg: proj.breg,
                });
                if opts.selection == SelectionMode::Lazy {
                    break;
                }
            }
        }
        Ok(chosen.unwrap_or(Choice::Objective))
    })
}

/// Switching rule II: step on the lowest-indexed constraint with
/// `λ_{i,k} f_i(x_k) ≥ h_k²`, where `φ_i(λ_{i,k}) = ½h_k²`.
pub fn run_switching_ii(
    problem: &ProblemInstance,
    schedule: &StepSchedule,
    n: usize,
    opts: SwitchingOptions,
) -> Result<RunResult> {
    check_constrained(problem, "second switching method")?;
    let domain = problem.domain()?;
    let geom = problem.geometry.clone();
    run_switching(problem, schedule, n, opts, |x, h| {
        let mut chosen = None;
        for (idx, f) in problem.constraints.iter().enumerate() {
            let (value, g) = f.eval(x);
            if value <= 0.0 && opts.selection == SelectionMode::Lazy {
                continue;
            }
            let step = match solve_phi_equation(&geom, &domain, x, &g, 0.5 * h * h) {
                Ok(s) => s,
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) if value > 0.0 => {
                    return Err(Error::InfeasibleLevel(format!(
                        "constraint {} is positive at a point minimizing its linearization",
                        idx + 1
                    )))
                }
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) => continue,
                Err(e) => return Err(e),
            };
            if chosen.is_none() && step.lambda * value >= h * h {
                chosen = Some(Choice::Constraint {
                    index: idx + 1,
                    lambda: step.lambda,
                    next: step.point,
                    grad_norm: geom.dual_norm(&g),
                    breg: step.breg,
                });
                if opts.selection == SelectionMode::Lazy {
                    break;
                }
            }
        }
        Ok(chosen.unwrap_or(Choice::Objective))
    })
}

fn run_switching(
    problem: &ProblemInstance,
    schedule: &StepSchedule,
    n: usize,
    opts: SwitchingOptions,
    mut select: impl FnMut(&crate::geometry::Vector, f64) -> Result<Choice>,
) -> Result<RunResult> {
    let start = schedule.window_start(n)?;
    let m = problem.constraints.len();
    let domain = problem.domain()?;
    let geom = &problem.geometry;
    let xstar = problem.truth.xstar.as_ref();

    // Doubling checkpoints N_q = 2^q with their window starts k(N_q).
    let mut pending: Vec<(usize, MultiplierSums)> = Vec::new();
    if opts.multipliers == MultiplierMode::Checkpoint {
        let mut nq = 2usize;
        while nq <= n {
            if let Ok(kq) = schedule.window_start(nq) {
                pending.push((nq, MultiplierSums::new((kq, nq), m)));
            }
            nq *= 2;
        }
    }
    let mut checkpoints: Vec<MultiplierEstimate> = Vec::new();

    let mut x = problem.x0.clone();
    let mut trace = Vec::with_capacity(n);
    let mut termination = Termination::Completed;
    for k in 0..n {
        let h = schedule.h(k)?;
        let f0 = problem.objective.eval(&x);
        let record_base = |step: StepKind, lambda: f64, next: crate::geometry::Vector, grad_norm: f64, breg: f64| {
            IterationRecord {
                k,
                step,
                h,
                scale: f64::NAN,
                lambda,
                weight: lambda,
                point: x.clone(),
                next,
                f0: f0.value,
                max_fi: problem.max_constraint(&x),
                composite: f0.value,
                breg_step: breg,
                grad_norm,
                delta: None,
            }
        };
        let mut record = match select(&x, h)? {
            Choice::Constraint { index, lambda, next, grad_norm, breg } => {
                record_base(StepKind::Constraint(index), lambda, next, grad_norm, breg)
            }
            Choice::Objective => match solve_phi_equation(geom, &domain, &x, &f0.subgradient, 0.5 * h * h) {
                Ok(s) => {
                    let mut r = record_base(StepKind::Objective, s.lambda, s.point, geom.dual_norm(&f0.subgradient), s.breg);
                    r.delta = proximity(geom, &f0.subgradient, &x, &r.next, xstar);
                    r
                }
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) if problem.max_constraint(&x) <= 0.0 => {
                    termination = Termination::DirectionallyOptimal { k };
                    break;
                }
                // x_k minimizes f₀ over Q but violates a constraint by less than the
                // switching test detects: stay until the step bound shrinks.
                Err(Error::DirectionallyOptimal | Error::ZeroSubgradient) => {
                    record_base(StepKind::Objective, 0.0, x.clone(), geom.dual_norm(&f0.subgradient), 0.0)
                }
                Err(e) => return Err(e),
            },
        };
        record.scale = schedule.tau(k)?;
        for (nq, sums) in pending.iter_mut() {
            sums.add(&record);
            if k + 1 == *nq {
                checkpoints.push(sums.finish());
            }
        }
        pending.retain(|(nq, _)| k + 1 < *nq);
        x = record.next.clone();
        trace.push(record);
    }

    let multipliers = match opts.multipliers {
        MultiplierMode::Full => Some(aggregate(&trace, (start, n), m)),
        MultiplierMode::Checkpoint => checkpoints.last().cloned(),
    };
    let best = multipliers.as_ref().and_then(|e| e.best_objective);
    Ok(RunResult { trace, termination, window: Some((start, n)), best, multipliers, checkpoints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gallery;
    use crate::schedules::ScheduleKind;

    fn schedule(p: &ProblemInstance) -> StepSchedule {
        StepSchedule::with_diameter(ScheduleKind::InverseSqrt, p.truth.d.unwrap()).unwrap()
    }

    #[test]
    fn selection_modes_agree() {
        for name in ["switch-disk", "switch-halfspaces", "switch-ball-l1"] {
            let p = gallery(name).unwrap();
            let s = schedule(&p);
            for run in [run_switching_i, run_switching_ii] {
                let lazy = run(&p, &s, 200, SwitchingOptions::default()).unwrap();
                let full = run(&p, &s, 200, SwitchingOptions { selection: SelectionMode::Exhaustive, ..Default::default() })
                    .unwrap();
                assert_eq!(lazy.trace, full.trace, "{name}");
            }
        }
    }

    #[test]
    fn checkpoint_estimates_match_full_windows() {
        let p = gallery("switch-halfspaces").unwrap();
        let s = schedule(&p);
        let opts = SwitchingOptions { multipliers: MultiplierMode::Checkpoint, ..Default::default() };
        let run = run_switching_ii(&p, &s, 256, opts).unwrap();
        assert!(!run.checkpoints.is_empty(), "{:?} {}", run.termination, run.trace.len());
        for est in &run.checkpoints {
            let nq = est.window.1;
            let short = run_switching_ii(&p, &s, nq, SwitchingOptions::default()).unwrap();
            assert_eq!(short.multipliers.as_ref(), Some(est));
        }
    }

    #[test]
    fn double_step_reports_window() {
        let p = gallery("disk-linear").unwrap();
        let s = schedule(&p);
        let run = run_double_step(&p, &s, 100).unwrap();
        let (start, end) = run.window.unwrap();
        assert!(start < end && end == 100);
        assert!(matches!(run_double_step(&p, &s, 0), Err(Error::HorizonTooShort { .. })));
    }
}
