//! Methods checked against explicit recursions written out with closed-form oracles.

use sgm_core::oracles::{gallery, gallery_with_seed};
use sgm_core::schedules::GammaSchedule;
use sgm_core::solvers::{run_composite_known_opt, run_unbounded, StepKind};
use sgm_core::Vector;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// On `f₀ = ½‖x − c‖²`, `f₁ = ‖x‖ − 1` over the whole plane the step solves
/// `½λ²‖g‖² = (1 − τ)D₀` in closed form.
#[test]
fn unbounded_method_matches_explicit_recursion() {
    let p = gallery("slater-unbounded").unwrap();
    let (d0, eps, n) = (0.5, 0.05, 2000);
    let run = run_unbounded(&p, &GammaSchedule::Sqrt, d0, eps, n).unwrap();
    assert_eq!(run.trace.len(), n);

    let c = Vector::from_column_slice(&[2.0, 1.0]);
    let x0 = Vector::zeros(2);
    let mut x = x0.clone();
    let (mut s0, mut s1, mut best) = (0.0, 0.0, f64::INFINITY);
    for (k, r) in run.trace.iter().enumerate() {
        let tau = (k as f64).sqrt() / ((k + 1) as f64).sqrt();
        let y = &x0 * (1.0 - tau) + &x * tau;
        let constraint = y.norm() - 1.0 >= eps;
        let g = if constraint { &y / y.norm() } else { &y - &c };
        let lambda = (2.0 * (1.0 - tau) * d0).sqrt() / g.norm();
        let next = &y - &g * lambda;
        let weight = lambda * ((k + 1) as f64).sqrt();
        let expected = if constraint { StepKind::Constraint(1) } else { StepKind::Objective };
        assert_eq!(r.step, expected, "step {k}");
        assert!(close(r.lambda, lambda, 1e-9), "step {k}: {} vs {lambda}", r.lambda);
        assert!(close(r.weight, weight, 1e-9));
        assert!((&r.next - &next).amax() <= 1e-9 * (1.0 + next.amax()), "step {k}");
        if constraint {
            s1 += weight;
        } else {
            s0 += weight;
            best = f64::min(best, 0.5 * (&y - &c).norm_squared());
        }
        x = r.next.clone();
    }
    let est = run.multipliers.unwrap();
    assert!(close(est.sigma[0], s0, 1e-9) && close(est.sigma[1], s1, 1e-9));
    assert!(close(est.lambdas.unwrap()[0], s1 / s0, 1e-9));
    assert!(close(est.best_objective.unwrap(), best, 1e-12));
}

/// With one smooth component and no constraints, the known-optimum step is
/// `x − (f(x) − f*)/‖∇f‖² · ∇f`.
#[test]
fn known_optimum_step_is_a_polyak_step_without_constraints() {
    let p = gallery_with_seed("sc-quadratic(4,1,5,1)", 7).unwrap();
    assert!(p.constraints.is_empty() && p.objective.components.len() == 1);
    let fstar = p.truth.fstar.unwrap();
    let run = run_composite_known_opt(&p, 30).unwrap();
    let mut x = p.x0.clone();
    for r in &run.trace {
        let e = p.objective.eval(&x);
        let g = e.subgradient;
        let next = &x - &g * ((e.value - fstar) / g.norm_squared());
        assert!((&r.next - &next).amax() <= 1e-10 * (1.0 + next.amax()), "step {}", r.k);
        x = next;
    }
}
