//! Parametric prox subproblems and their scalar dual controls.
//!
//! `T_x̄(λ) = argmin_{x ∈ Q} λ⟨g, x⟩ + β(x̄, x)` and
//! `φ_x̄(λ) = λ⟨g, x̄ − T⟩ − β(x̄, T)` with `φ'(λ) = ⟨g, x̄ − T⟩`.

use crate::error::{Error, Result};
use crate::geometry::{check_same_dim, DualVector, ProxGeometry, Vector, ENTROPY_FLOOR};
use crate::oracles::{Linearization, ProblemInstance};
use crate::rootfind::{bisect_threshold, newton_bisect, MAX_DOUBLINGS};
use crate::sets::{project_polyhedron, Halfspace, SetDescriptor, MAX_ENUMERATED_CONSTRAINTS};

/// Relative accuracy of `φ(λ) = target` in [`solve_phi_equation`].
pub const PHI_RELATIVE_TOLERANCE: f64 = 1e-13;

/// Solution of a prox subproblem together with its dual step size.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxStepResult {
    pub point: Vector,
    pub lambda: f64,
    /// `φ(λ)` for the subproblem that produced `point`.
    pub phi: f64,
    /// `φ'(λ)`.
    pub derivative: f64,
    /// `β(x̄, T)`.
    pub breg: f64,
    /// `‖x̄ − T‖` in the geometry norm.
    pub displacement: f64,
}

impl ProxStepResult {
    fn stay(center: &Vector) -> Self {
        ProxStepResult {
            point: center.clone(),
            lambda: 0.0,
            phi: 0.0,
            derivative: 0.0,
            breg: 0.0,
            displacement: 0.0,
        }
    }
}

/// `argmin_{x ∈ Q} ⟨g, x⟩ + β(center, x)`; the step size is folded into `g`.
pub fn prox_map(geom: &ProxGeometry, set: &SetDescriptor, center: &Vector, g: &DualVector) -> Result<Vector> {
    check_same_dim(center, g)?;
    match geom {
        ProxGeometry::Euclidean(metric) => {
            let z = center - metric.apply_inv(g);
            set.project(metric, &z)
        }
        ProxGeometry::Entropy => {
            if *set != SetDescriptor::Simplex {
                return Err(Error::Capability(format!(
                    "entropy prox is only available on the simplex, not on {}",
                    set.kind_name()
                )));
            }
            geom.check_domain(center)?;
            let logits: Vec<f64> = center.iter().zip(g.iter()).map(|(c, gi)| c.ln() - gi).collect();
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights = Vector::from_iterator(center.len(), logits.iter().map(|l| (l - top).exp()));
            let total = weights.sum();
            Ok(weights.map(|w| (w / total).max(ENTROPY_FLOOR)))
        }
    }
}

fn finish(geom: &ProxGeometry, center: &Vector, g: &DualVector, lambda: f64, point: Vector) -> Result<ProxStepResult> {
    let breg = geom.bregman(center, &point)?;
    let derivative = g.dot(&(center - &point));
    let displacement = geom.norm(&(center - &point));
    Ok(ProxStepResult {
        phi: lambda * derivative - breg,
        derivative,
        breg,
        displacement,
        lambda,
        point,
    })
}

/// `T_x̄(λ)` with `φ_x̄(λ)` and `φ'_x̄(λ)`.
pub fn prox_step(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    center: &Vector,
    g: &DualVector,
    lambda: f64,
) -> Result<ProxStepResult> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::config("lambda", "must be finite and nonnegative"));
    }
    if lambda == 0.0 {
        check_same_dim(center, g)?;
        return Ok(ProxStepResult::stay(center));
    }
    let point = prox_map(geom, set, center, &(g * lambda))?;
    finish(geom, center, g, lambda, point)
}

/// `(φ_x̄(λ), φ'_x̄(λ))`.
pub fn phi_value_and_derivative(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    center: &Vector,
    g: &DualVector,
    lambda: f64,
) -> Result<(f64, f64)> {
    let r = prox_step(geom, set, center, g, lambda)?;
    Ok((r.phi, r.derivative))
}

/// Finds `λ` with `φ_x̄(λ) = target`.
///
/// Returns [`Error::DirectionallyOptimal`] when `x̄` minimizes `⟨g, ·⟩` over `Q`
/// (then `φ ≡ 0`), and [`Error::ZeroSubgradient`] for `g = 0`.
pub fn solve_phi_equation(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    center: &Vector,
    g: &DualVector,
    target: f64,
) -> Result<ProxStepResult> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::config("target", "must be finite and positive"));
    }
    check_same_dim(center, g)?;
    let gnorm = geom.dual_norm(g);
    if gnorm == 0.0 {
        return Err(Error::ZeroSubgradient);
    }
    let eval = |lambda: f64| phi_value_and_derivative(geom, set, center, g, lambda);

    let (mut phi, derivative) = eval(1.0)?;
    // T(λ) = x̄ for one λ > 0 already means x̄ minimizes ⟨g, ·⟩ over Q.
    if derivative <= 1e-15 * gnorm * (1.0 + geom.norm(center)) {
        return Err(Error::DirectionallyOptimal);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut doublings = 0;
    while phi < target {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::UnboundedPhi { target });
        }
        lo = hi;
        hi *= 2.0;
        phi = eval(hi)?.0;
        doublings += 1;
    }
    let lambda = newton_bisect(eval, lo, hi, target, PHI_RELATIVE_TOLERANCE)?;
    prox_step(geom, set, center, g, lambda)
}

/// Linear inequalities describing a polyhedral set, if it is one.
fn polyhedral_description(set: &SetDescriptor, n: usize) -> Option<Vec<Halfspace>> {
    match set {
        SetDescriptor::Box { lower, upper } => {
            let mut list = Vec::with_capacity(2 * n);
            for i in 0..n {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                list.push(Halfspace::new(e.clone(), upper[i]));
                list.push(Halfspace::new(-e, -lower[i]));
            }
            Some(list)
        }
        other => other.as_halfspaces(),
    }
}

/// `argmin_{x ∈ Q} ⟨g, x⟩ + β(center, x)` subject to extra linear `cuts`.
/// Returns the point and one multiplier per cut.
pub fn prox_with_cuts(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    center: &Vector,
    g: &DualVector,
    cuts: &[Halfspace],
) -> Result<(Vector, Vec<f64>)> {
    let n = center.len();
    let live: Vec<usize> = (0..cuts.len()).filter(|&i| cuts[i].normal.amax() > 0.0).collect();
    if let Some(i) = (0..cuts.len()).find(|&i| cuts[i].normal.amax() == 0.0 && cuts[i].offset < 0.0) {
        return Err(Error::InfeasibleLevel(format!("cut {i} reads 0 <= {}", cuts[i].offset)));
    }
    let active_cuts: Vec<Halfspace> = live.iter().map(|&i| cuts[i].clone()).collect();
    let scatter = |mu: Vec<f64>| {
        let mut out = vec![0.0; cuts.len()];
        for (k, &i) in live.iter().enumerate() {
            out[i] = mu[k];
        }
        out
    };
    if active_cuts.is_empty() {
        return Ok((prox_map(geom, set, center, g)?, vec![0.0; cuts.len()]));
    }
    if let ProxGeometry::Euclidean(metric) = geom {
        let exact = match set {
            SetDescriptor::WholeSpace | SetDescriptor::Halfspaces(_) => true,
            SetDescriptor::Box { .. } => active_cuts.len() > 1 || metric.diagonal_entries(n).is_none(),
            _ => false,
        };
        if exact {
            if let Some(mut all) = polyhedral_description(set, n) {
                if all.len() + active_cuts.len() <= MAX_ENUMERATED_CONSTRAINTS {
                    let base = all.len();
                    all.extend(active_cuts.iter().cloned());
                    let z = center - metric.apply_inv(g);
                    let (x, mu) = project_polyhedron(metric, &z, &all)?;
                    return Ok((x, scatter(mu[base..].to_vec())));
                }
            }
        }
    }
    if active_cuts.len() == 1 {
        let (x, mu) = single_cut_search(geom, set, center, g, &active_cuts[0])?;
        return Ok((x, scatter(vec![mu])));
    }
    Err(Error::Capability(format!(
        "{} simultaneous linear cuts on a {} set",
        active_cuts.len(),
        set.kind_name()
    )))
}

/// One-dimensional dual search on the multiplier of a single cut `⟨a, x⟩ ≤ b`.
fn single_cut_search(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    center: &Vector,
    g: &DualVector,
    cut: &Halfspace,
) -> Result<(Vector, f64)> {
    let point = |mu: f64| prox_map(geom, set, center, &(g + &cut.normal * mu));
    let tol = |x: &Vector| 1e-15 * (1.0 + cut.offset.abs() + cut.normal.amax() * x.amax());
    let satisfied = |mu: f64| -> Result<bool> {
        let x = point(mu)?;
        Ok(cut.residual(&x) <= tol(&x))
    };
    let x0 = point(0.0)?;
    let r0 = cut.residual(&x0);
    if r0 <= tol(&x0) {
        return Ok((x0, 0.0));
    }
    let anorm = geom.dual_norm(&cut.normal);
    let mut lo = 0.0;
    let mut hi = r0 / (anorm * anorm);
    let mut doublings = 0;
    while !satisfied(hi)? {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::InfeasibleLevel(
                "linear cut cannot be met inside the feasible set".into(),
            ));
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    let mu = bisect_threshold(satisfied, lo, hi)?;
    Ok((point(mu)?, mu))
}

fn finish_composite(
    geom: &ProxGeometry,
    center: &Vector,
    lin: &Linearization,
    psi_linear: &DualVector,
    lambda: f64,
    point: Vector,
) -> Result<ProxStepResult> {
    let f_center = lin.center_value() + psi_linear.dot(center);
    let derivative = f_center - lin.value_at(&point) - psi_linear.dot(&point);
    let breg = geom.bregman(center, &point)?;
    let displacement = geom.norm(&(center - &point));
    Ok(ProxStepResult {
        phi: lambda * derivative - breg,
        derivative,
        breg,
        displacement,
        lambda,
        point,
    })
}

/// Cuts `fᵢ(x̄) + ⟨gᵢ + c, x − x̄⟩ + ⟨c, x̄⟩ ≤ level` for each linear piece.
fn level_cuts(lin: &Linearization, psi_linear: &DualVector, level: f64) -> Vec<Halfspace> {
    lin.values
        .iter()
        .zip(&lin.gradients)
        .map(|(v, g)| Halfspace::new(g + psi_linear, level - v + g.dot(&lin.center)))
        .collect()
}

/// `T̂_x̄(λ) = argmin_{x ∈ dom} λ[ℓ_x̄(x) + ψ(x)] + β(x̄, x)` for a generic model.
pub fn composite_prox_step_with(
    geom: &ProxGeometry,
    domain: &SetDescriptor,
    lin: &Linearization,
    psi_linear: &DualVector,
    lambda: f64,
) -> Result<ProxStepResult> {
    let center = &lin.center;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::config("lambda", "must be finite and nonnegative"));
    }
    if lambda == 0.0 {
        return Ok(ProxStepResult::stay(center));
    }
    if lin.values.len() == 1 {
        let g = (&lin.gradients[0] + psi_linear) * lambda;
        let point = prox_map(geom, domain, center, &g)?;
        return finish_composite(geom, center, lin, psi_linear, lambda, point);
    }
    // Epigraph form: find the level s whose cut multipliers sum to λ.
    let linear = psi_linear * lambda;
    let at_level = |s: f64| -> Result<(Vector, f64)> {
        match prox_with_cuts(geom, domain, center, &linear, &level_cuts(lin, &DualVector::zeros(center.len()), s)) {
            Ok((x, mu)) => Ok((x, mu.iter().sum())),
            Err(Error::InfeasibleLevel(_)) => Ok((center.clone(), f64::INFINITY)),
            Err(e) => Err(e),
        }
    };
    let free = prox_map(geom, domain, center, &linear)?;
    let s_hi = lin.value_at(&free);
    let mut step = 1e-3 * (1.0 + s_hi.abs());
    let mut s_lo = s_hi - step;
    let mut doublings = 0;
    while at_level(s_lo)?.1 < lambda {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::RootSearch("composite level bracket did not close".into()));
        }
        step *= 2.0;
        s_lo = s_hi - step;
        doublings += 1;
    }
    let s = bisect_threshold(|s| Ok(at_level(s)?.1 <= lambda), s_lo, s_hi)?;
    let point = at_level(s)?.0;
    finish_composite(geom, center, lin, psi_linear, lambda, point)
}

/// `T̂_x̄(λ)` and `φ̂_x̄(λ)` for the composite objective `f + ψ` of `problem`.
pub fn composite_prox_step(problem: &ProblemInstance, center: &Vector, lambda: f64) -> Result<ProxStepResult> {
    let domain = problem.domain()?;
    let lin = problem.objective.linearize(center);
    let c = problem.psi.linear_part(problem.dim());
    composite_prox_step_with(&problem.geometry, &domain, &lin, &c, lambda)
}

/// Bregman projection of `x̄` onto `{x ∈ dom : ℓ_x̄(x) + ψ(x) ≤ level}`.
/// The returned `lambda` is the total multiplier of the level constraint.
pub fn level_projection(
    geom: &ProxGeometry,
    domain: &SetDescriptor,
    lin: &Linearization,
    psi_linear: &DualVector,
    level: f64,
) -> Result<ProxStepResult> {
    let center = &lin.center;
    let f_center = lin.center_value() + psi_linear.dot(center);
    if f_center <= level {
        return Ok(ProxStepResult::stay(center));
    }
    let cuts = level_cuts(lin, psi_linear, level);
    let zero = DualVector::zeros(center.len());
    let (point, mu) = prox_with_cuts(geom, domain, center, &zero, &cuts)?;
    let lambda = mu.iter().sum();
    finish_composite(geom, center, lin, psi_linear, lambda, point)
}

/// Step of the composite method when the optimal value `F*` is known:
/// the projection onto the level set `{ℓ_x̄ + ψ ≤ F*}`.
pub fn known_optimum_step(problem: &ProblemInstance, center: &Vector, fstar: f64) -> Result<ProxStepResult> {
    let domain = problem.domain()?;
    let lin = problem.objective.linearize(center);
    let c = problem.psi.linear_part(problem.dim());
    level_projection(&problem.geometry, &domain, &lin, &c, fstar)
}

/// Bregman projection of `x` onto `{T ∈ Q : value + ⟨subgradient, T − x⟩ ≤ 0}`
/// with the multiplier of the linear constraint.
pub fn linearized_constraint_projection(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    x: &Vector,
    value: f64,
    subgradient: &DualVector,
) -> Result<(ProxStepResult, f64)> {
    let lin = Linearization { center: x.clone(), values: vec![value], gradients: vec![subgradient.clone()] };
    let zero = DualVector::zeros(x.len());
    let r = level_projection(geom, set, &lin, &zero, 0.0)?;
    let lambda = r.lambda;
    Ok((r, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gallery;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_column_slice(c)
    }

    #[test]
    fn unconstrained_prox_step() {
        let r = prox_step(&ProxGeometry::euclidean(), &SetDescriptor::WholeSpace, &v(&[0.0, 0.0]), &v(&[3.0, 4.0]), 0.2)
            .unwrap();
        assert_abs_diff_eq!(r.point[0], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.point[1], -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r.phi, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.derivative, 5.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_lambda_stays() {
        let r = prox_step(&ProxGeometry::Entropy, &SetDescriptor::Simplex, &v(&[0.3, 0.7]), &v(&[1.0, -2.0]), 0.0)
            .unwrap();
        assert_eq!(r.point, v(&[0.3, 0.7]));
        assert_eq!((r.phi, r.derivative), (0.0, 0.0));
    }

    #[test]
    fn entropy_prox_is_multiplicative_weights() {
        let r = prox_step(&ProxGeometry::Entropy, &SetDescriptor::Simplex, &v(&[0.5, 0.5]), &v(&[1.0, 0.0]), 2f64.ln())
            .unwrap();
        assert_abs_diff_eq!(r.point[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.point[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn phi_equation_unconstrained() {
        let r = solve_phi_equation(&ProxGeometry::euclidean(), &SetDescriptor::WholeSpace, &v(&[0.0, 0.0]), &v(&[3.0, 4.0]), 0.5)
            .unwrap();
        assert_abs_diff_eq!(r.lambda, 0.2, epsilon = 1e-13);
    }

    #[test]
    fn phi_equation_directionally_optimal() {
        let q = SetDescriptor::Halfspaces(vec![Halfspace::new(v(&[0.0, 1.0]), 0.0)]);
        let err = solve_phi_equation(&ProxGeometry::euclidean(), &q, &v(&[1.0, 0.0]), &v(&[0.0, -1.0]), 0.5).unwrap_err();
        assert_eq!(err, Error::DirectionallyOptimal);
        let err = solve_phi_equation(&ProxGeometry::euclidean(), &q, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), 0.5).unwrap_err();
        assert_eq!(err, Error::ZeroSubgradient);
    }

    #[test]
    fn phi_equation_entropy_matches_grid() {
        let (geom, q, x, g) = (ProxGeometry::Entropy, SetDescriptor::Simplex, v(&[0.5, 0.5]), v(&[1.0, 0.0]));
        let r = solve_phi_equation(&geom, &q, &x, &g, 0.05).unwrap();
        assert!((r.phi - 0.05).abs() <= 1e-10 * 0.05);
        // Dense grid: the last grid λ with φ ≤ 0.05 brackets the root.
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
        let below = grid
            .iter()
            .rfind(|&&l| phi_value_and_derivative(&geom, &q, &x, &g, l).unwrap().0 <= 0.05)
            .copied()
            .unwrap();
        assert!(r.lambda >= below && r.lambda <= below + 1e-3);
    }

    #[test]
    fn optstep_known_optimum_halves() {
        let p = gallery("optstep-halfspace").unwrap();
        let r = known_optimum_step(&p, &v(&[1.0, 0.0]), 0.0).unwrap();
        assert_abs_diff_eq!(r.point[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.point[1], 0.0, epsilon = 1e-15);
        let stay = known_optimum_step(&p, &v(&[0.0, 0.0]), 0.0).unwrap();
        assert_eq!(stay.lambda, 0.0);
        assert_eq!(stay.point, v(&[0.0, 0.0]));
    }

    #[test]
    fn known_optimum_equals_composite_prox_at_its_lambda() {
        let p = gallery("optstep-halfspace").unwrap();
        let x = v(&[0.8, -0.3]);
        let r = known_optimum_step(&p, &x, 0.5).unwrap();
        let c = composite_prox_step(&p, &x, r.lambda).unwrap();
        assert_abs_diff_eq!((r.point - c.point).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn composite_prox_linear_closed_form() {
        let mut p = gallery("optstep-halfspace").unwrap();
        p.psi = crate::oracles::CompositeTerm::Zero;
        p.objective = crate::oracles::MaxType::single(crate::oracles::Function::Linear { a: v(&[1.0, -2.0]), c: 0.3 });
        let r = composite_prox_step(&p, &v(&[0.5, 0.5]), 0.25).unwrap();
        assert_abs_diff_eq!(r.point[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.point[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn composite_max_of_two_lines() {
        // f = max(x, −x) on the line, x̄ = 1: for λ ≥ 1 the prox lands on the kink.
        let mut p = gallery("optstep-halfspace").unwrap();
        p.psi = crate::oracles::CompositeTerm::Zero;
        p.x0 = v(&[1.0]);
        p.objective = crate::oracles::MaxType {
            components: vec![
                crate::oracles::Function::Linear { a: v(&[1.0]), c: 0.0 },
                crate::oracles::Function::Linear { a: v(&[-1.0]), c: 0.0 },
            ],
        };
        let r = composite_prox_step(&p, &v(&[1.0]), 3.0).unwrap();
        assert_abs_diff_eq!(r.point[0], 0.0, epsilon = 1e-10);
        let r = composite_prox_step(&p, &v(&[1.0]), 0.4).unwrap();
        assert_abs_diff_eq!(r.point[0], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn constraint_projection_examples() {
        let e = ProxGeometry::euclidean();
        let (r, lambda) =
            linearized_constraint_projection(&e, &SetDescriptor::WholeSpace, &v(&[0.0, 0.0]), -1.0, &v(&[1.0, 0.0])).unwrap();
        assert_eq!((r.point.clone(), lambda), (v(&[0.0, 0.0]), 0.0));

        let (r, lambda) =
            linearized_constraint_projection(&e, &SetDescriptor::WholeSpace, &v(&[0.0, 0.0]), 1.0, &v(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(r.point[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda, 1.0, epsilon = 1e-15);

        let ball = SetDescriptor::Ball { center: v(&[0.0, 0.0]), radius: 1.0 };
        let (r, lambda) = linearized_constraint_projection(&e, &ball, &v(&[1.0, 0.0]), 2.0, &v(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(r.point[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.point[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda, 2.0, epsilon = 1e-9);

        let err = linearized_constraint_projection(&e, &ball, &v(&[1.0, 0.0]), 2.5, &v(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLevel(_)));
    }
}
