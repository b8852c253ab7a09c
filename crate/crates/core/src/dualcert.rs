//! Multiplier estimates, dual function values and duality-gap certificates.
//!
//! Dual values are computed by nested golden-section search over the
//! coordinates, which is exact up to rounding for convex Lagrangians in
//! dimension at most [`MAX_DUAL_DIM`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ProxGeometry, Vector};
use crate::oracles::ProblemInstance;
use crate::sets::SetDescriptor;
use crate::solvers::{IterationRecord, RunResult};

pub const MAX_DUAL_DIM: usize = 3;
/// Golden-section iterations per coordinate; enough to shrink any interval to rounding level.
const GOLDEN_ITERATIONS: usize = 110;
const MAX_RADIUS_DOUBLINGS: usize = 40;
/// Upper end of the multiplier grid used for one-dimensional dual suprema.
pub const DUAL_GRID_MAX: f64 = 1e6;

/// Aggregated step weights over a window of iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierEstimate {
    /// Iterations `k` with `window.0 ≤ k < window.1`.
    pub window: (usize, usize),
    /// `σ_0` (objective steps) followed by `σ_1 … σ_m`.
    pub sigma: Vec<f64>,
    /// `λ_i = σ_i/σ_0`, absent when `σ_0 = 0`.
    pub lambdas: Option<Vec<f64>>,
    /// `(1/σ_0) Σ_{objective steps} w_k f₀(point_k)`.
    pub weighted_objective: Option<f64>,
    /// Smallest `f₀` over the objective steps of the window.
    pub best_objective: Option<f64>,
}

/// Running sums behind a [`MultiplierEstimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSums {
    window: (usize, usize),
    sigma: Vec<f64>,
    weighted: f64,
    best: Option<f64>,
}

impl MultiplierSums {
    pub fn new(window: (usize, usize), m: usize) -> Self {
        MultiplierSums { window, sigma: vec![0.0; m + 1], weighted: 0.0, best: None }
    }

    /// Adds `record` if it lies in the window.
    pub fn add(&mut self, record: &IterationRecord) {
        if record.k < self.window.0 || record.k >= self.window.1 {
            return;
        }
        let i = record.step.index();
        if i >= self.sigma.len() {
            return;
        }
        self.sigma[i] += record.weight;
        if i == 0 {
            self.weighted += record.weight * record.f0;
            self.best = Some(self.best.map_or(record.f0, |b| b.min(record.f0)));
        }
    }

    pub fn finish(&self) -> MultiplierEstimate {
        let s0 = self.sigma[0];
        let (lambdas, weighted_objective) = if s0 > 0.0 {
            (Some(self.sigma[1..].iter().map(|s| s / s0).collect()), Some(self.weighted / s0))
        } else {
            (None, None)
        };
        MultiplierEstimate {
            window: self.window,
            sigma: self.sigma.clone(),
            lambdas,
            weighted_objective,
            best_objective: self.best,
        }
    }
}

/// Multiplier estimate over `window` for a problem with `m` constraints.
pub fn aggregate(trace: &[IterationRecord], window: (usize, usize), m: usize) -> MultiplierEstimate {
    let mut sums = MultiplierSums::new(window, m);
    for r in trace {
        sums.add(r);
    }
    sums.finish()
}

/// Coordinate-wise description of the set the dual minimum runs over.
enum Region {
    Box(Vector, Vector),
    Ball(Vector, f64),
    Simplex,
}

impl Region {
    /// Range of coordinate `j` given fixed `x[..j]` and free `x[j+1..]`.
    fn interval(&self, x: &Vector, j: usize) -> Option<(f64, f64)> {
        let n = x.len();
        match self {
            Region::Box(lo, hi) => Some((lo[j], hi[j])),
            Region::Ball(c, r) => {
                let used: f64 = (0..j).map(|i| (x[i] - c[i]).powi(2)).sum();
                let rem = r * r - used;
                if rem < 0.0 {
                    return None;
                }
                let w = rem.sqrt();
                Some((c[j] - w, c[j] + w))
            }
            Region::Simplex => {
                let used: f64 = (0..j).map(|i| x[i]).sum();
                let rem = (1.0 - used).max(0.0);
                if j + 1 == n {
                    Some((rem, rem))
                } else {
                    Some((0.0, rem))
                }
            }
        }
    }
}

/// `min` of a convex `f` over `[a, b]` by golden-section search.
fn golden(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    if a >= b {
        return (a, f(a));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
            break;
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for end in [a, b] {
        let v = f(end);
        if v < best.1 {
            best = (end, v);
        }
    }
    best
}

/// Minimizes `f` over `region` coordinate by coordinate; returns the value and minimizer.
fn nested_min(region: &Region, n: usize, f: &dyn Fn(&Vector) -> f64) -> (f64, Vector) {
    fn level(region: &Region, x: &mut Vector, j: usize, f: &dyn Fn(&Vector) -> f64) -> f64 {
        let Some((a, b)) = region.interval(x, j) else {
            return f64::INFINITY;
        };
        let n = x.len();
        let inner = |t: f64, x: &mut Vector| {
            x[j] = t;
            if j + 1 == n {
                f(x)
            } else {
                level(region, x, j + 1, f)
            }
        };
        let mut scratch = x.clone();
        let (t, v) = golden(a, b, |t| inner(t, &mut scratch));
        x[j] = t;
        if j + 1 < n {
            level(region, x, j + 1, f);
        }
        v
    }
    let mut x = Vector::zeros(n);
    let v = level(region, &mut x, 0, f);
    (v, x)
}

fn region_for(problem: &ProblemInstance, restriction: Option<f64>) -> Result<Option<Region>> {
    let domain = problem.domain()?;
    let ball_radius = |d: f64| -> Result<f64> {
        let scalar = match &problem.geometry {
            ProxGeometry::Euclidean(m) => m.scalar(),
            ProxGeometry::Entropy => None,
        };
        let b = scalar.ok_or_else(|| {
            Error::CertificateUnavailable("restricted dual needs a scalar Euclidean metric".into())
        })?;
        Ok((2.0 * d / b).sqrt())
    };
    match (&domain, restriction) {
        (_, Some(d)) if !(d > 0.0) => Err(Error::config("restriction", "must be positive")),
        (SetDescriptor::WholeSpace, Some(d)) => Ok(Some(Region::Ball(problem.x0.clone(), ball_radius(d)?))),
        (SetDescriptor::WholeSpace, None) => Ok(None),
        (_, Some(_)) => Err(Error::CertificateUnavailable(format!(
            "restricted dual over a {} set",
            domain.kind_name()
        ))),
        (SetDescriptor::Box { lower, upper }, None) => Ok(Some(Region::Box(lower.clone(), upper.clone()))),
        (SetDescriptor::Ball { center, radius }, None) => Ok(Some(Region::Ball(center.clone(), *radius))),
        (SetDescriptor::Simplex, None) => Ok(Some(Region::Simplex)),
        (SetDescriptor::Halfspaces(_), None) => Err(Error::CertificateUnavailable(
            "dual values over polyhedral sets are not supported".into(),
        )),
    }
}

/// `φ(λ) = min_{x ∈ Q} f₀(x) + Σ λ_i f_i(x)`, or the restricted value over
/// `{x ∈ Q : β(x₀, x) ≤ D}` when `restriction = Some(D)`.
///
/// Returns `−∞` when the Lagrangian is unbounded below on an unbounded set.
pub fn dual_value(problem: &ProblemInstance, lambdas: &[f64], restriction: Option<f64>) -> Result<f64> {
    Ok(dual_minimizer(problem, lambdas, restriction)?.0)
}

/// Dual value together with a minimizer of the Lagrangian.
pub fn dual_minimizer(problem: &ProblemInstance, lambdas: &[f64], restriction: Option<f64>) -> Result<(f64, Vector)> {
    let n = problem.dim();
    if lambdas.len() != problem.constraints.len() {
        return Err(Error::Dimension { expected: problem.constraints.len(), got: lambdas.len() });
    }
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::config("lambda", "multipliers must be finite and nonnegative"));
    }
    if n > MAX_DUAL_DIM {
        return Err(Error::CertificateUnavailable(format!("dimension {n} exceeds {MAX_DUAL_DIM}")));
    }
    if !problem.objective.is_convex() || problem.constraints.iter().any(|f| !f.is_convex()) {
        return Err(Error::CertificateUnavailable("the Lagrangian is not convex".into()));
    }
    let lagrangian = |x: &Vector| problem.lagrangian(x, lambdas) + problem.psi.linear_part(n).dot(x);
    if let Some(region) = region_for(problem, restriction)? {
        return Ok(nested_min(&region, n, &lagrangian));
    }
    // Whole space: grow a ball around x₀ until the minimizer is interior.
    let mut radius = 1.0 + problem.x0.amax();
    for _ in 0..MAX_RADIUS_DOUBLINGS {
        let (v, x) = nested_min(&Region::Ball(problem.x0.clone(), radius), n, &lagrangian);
        if (&x - &problem.x0).norm() < 0.5 * radius {
            return Ok((v, x));
        }
        radius *= 2.0;
    }
    Ok((f64::NEG_INFINITY, problem.x0.clone()))
}

/// Duality-gap report for a run that carries a multiplier estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub lambdas: Vec<f64>,
    /// `φ(λ̄)`, or `φ_D(λ̄)` when `restricted`.
    pub dual_value: f64,
    pub restricted: bool,
    /// `f₀*(N)`.
    pub primal_best: f64,
    /// `(1/σ₀) Σ w_k f₀(point_k)`.
    pub weighted_objective: f64,
    /// `f₀*(N) − dual_value`.
    pub gap: f64,
    /// `weighted_objective − dual_value`.
    pub weighted_gap: f64,
    /// `M₀ h_{k(N)}`, when the run has step bounds.
    pub gap_bound: Option<f64>,
    /// `(M₀ + ⟨λ*, M⟩) h_{k(N)}` from the true multipliers or a Slater point.
    pub optimality_bound: Option<f64>,
    /// `M₀` was measured along the trace instead of declared.
    pub empirical_objective_bound: bool,
}

/// Builds a certificate from the multiplier estimate of `run`.
pub fn gap_certificate(problem: &ProblemInstance, run: &RunResult, restriction: Option<f64>) -> Result<DualCertificate> {
    let est = run
        .multipliers
        .as_ref()
        .ok_or_else(|| Error::CertificateUnavailable("the run has no multiplier estimate".into()))?;
    certificate_from_estimate(problem, est, &run.trace, restriction)
}

/// `h_{k(N)}` read from the trace.
pub fn window_step_bound(trace: &[IterationRecord], start: usize) -> Option<f64> {
    trace.iter().find(|r| r.k == start).map(|r| r.h).filter(|h| h.is_finite())
}

/// Largest `‖f₀'(x)‖_*` over `x₀` and the iterates of `trace`.
pub fn empirical_objective_bound(problem: &ProblemInstance, trace: &[IterationRecord]) -> f64 {
    std::iter::once(&problem.x0)
        .chain(trace.iter().map(|r| &r.point))
        .map(|x| problem.geometry.dual_norm(&problem.objective.eval(x).subgradient))
        .filter(|g| g.is_finite())
        .fold(0.0, f64::max)
}

/// Certificate for `est`, with `h_{k(N)}` and, when `M₀` is not declared, an
/// empirical `M₀` taken from `trace`.
pub fn certificate_from_estimate(
    problem: &ProblemInstance,
    est: &MultiplierEstimate,
    trace: &[IterationRecord],
    restriction: Option<f64>,
) -> Result<DualCertificate> {
    let (Some(lambdas), Some(weighted), Some(best)) = (&est.lambdas, est.weighted_objective, est.best_objective) else {
        return Err(Error::CertificateUnavailable("no objective steps in the window".into()));
    };
    let dual = dual_value(problem, lambdas, restriction)?;
    let truth = &problem.truth;
    let h_start = window_step_bound(trace, est.window.0);
    let empirical = truth.objective_bound.is_none();
    let m0 = truth.objective_bound.unwrap_or_else(|| empirical_objective_bound(problem, trace));
    let gap_bound = h_start.map(|h| m0 * h);
    let multiplier_size = match (&truth.multipliers, &truth.constraint_bounds) {
        (Some(l), Some(m)) => Some(l.iter().zip(m).map(|(a, b)| a * b).sum::<f64>()),
        _ => truth.slater_point.as_ref().and_then(|x| slater_bound(problem, x).ok()),
    };
    let optimality_bound = multiplier_size.zip(h_start).map(|(s, h)| (m0 + s) * h);
    Ok(DualCertificate {
        lambdas: lambdas.clone(),
        dual_value: dual,
        restricted: restriction.is_some(),
        primal_best: best,
        weighted_objective: weighted,
        gap: best - dual,
        weighted_gap: weighted - dual,
        gap_bound,
        optimality_bound,
        empirical_objective_bound: empirical,
    })
}

/// Bound `(f₀(x̂) − f₀*)·max_i M_i/(−f_i(x̂))` on `⟨λ*, M⟩` from a strictly feasible `x̂`.
pub fn slater_bound(problem: &ProblemInstance, xhat: &Vector) -> Result<f64> {
    let values = problem.constraint_values(xhat);
    if let Some(i) = values.iter().position(|&v| !(v < 0.0)) {
        return Err(Error::NotSlater(format!("constraint {} has value {} ≥ 0", i + 1, values[i])));
    }
    let fstar = problem
        .truth
        .fstar
        .ok_or_else(|| Error::CertificateUnavailable("slater bound needs f₀*".into()))?;
    let bounds = problem
        .truth
        .constraint_bounds
        .as_ref()
        .ok_or_else(|| Error::CertificateUnavailable("slater bound needs the constraint bounds M_i".into()))?;
    let ratio = bounds.iter().zip(&values).map(|(m, v)| m / -v).fold(0.0, f64::max);
    Ok((problem.f0(xhat) - fstar) * ratio)
}

/// Supremum of a one-constraint dual function over a multiplier grid on `[0, DUAL_GRID_MAX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSupremum {
    pub lambda: f64,
    pub value: f64,
    /// The best grid point is the right end: the supremum is approached, not attained.
    pub unattained: bool,
}

/// Grid of 0 and 40 log-spaced points per decade from `1e-4` to [`DUAL_GRID_MAX`].
pub fn multiplier_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let decades = 10;
    let per = 40;
    for j in 0..=decades * per {
        grid.push(10f64.powf(-4.0 + j as f64 / per as f64));
    }
    grid
}

pub fn dual_supremum_1d(problem: &ProblemInstance, restriction: Option<f64>) -> Result<DualSupremum> {
    if problem.constraints.len() != 1 {
        return Err(Error::CertificateUnavailable("grid supremum needs exactly one constraint".into()));
    }
    let grid = multiplier_grid();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&l| dual_value(problem, &[l], restriction))
        .collect::<Result<_>>()?;
    let (idx, &value) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(DualSupremum { lambda: grid[idx], value, unattained: idx + 1 == grid.len() })
}
