//! Simple closed convex sets and their projections in a quadratic metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Metric, Vector};

/// Largest number of linear inequalities handled by exact active-set enumeration.
pub const MAX_ENUMERATED_CONSTRAINTS: usize = 12;

/// The inequality `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn residual(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn tolerance(&self, x: &Vector) -> f64 {
        1e-13 * (1.0 + self.offset.abs() + self.normal.amax() * x.amax())
    }
}

/// Feasible sets the prox maps know how to handle.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    WholeSpace,
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    Halfspaces(Vec<Halfspace>),
    /// `{x ≥ 0 : Σ xᵢ = 1}`.
    Simplex,
}

impl SetDescriptor {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_len = |key: &str, v: &Vector| {
            if v.len() != dim {
                Err(Error::config(key, format!("expected length {dim}, got {}", v.len())))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(Error::config(key, "entries must be finite"))
            } else {
                Ok(())
            }
        };
        match self {
            SetDescriptor::WholeSpace | SetDescriptor::Simplex => Ok(()),
            SetDescriptor::Box { lower, upper } => {
                check_len("Q.lower", lower)?;
                check_len("Q.upper", upper)?;
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return Err(Error::config("Q", "box needs lower <= upper"));
                }
                Ok(())
            }
            SetDescriptor::Ball { center, radius } => {
                check_len("Q.center", center)?;
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::config("Q.radius", "must be positive"));
                }
                Ok(())
            }
            SetDescriptor::Halfspaces(list) => {
                if list.is_empty() {
                    return Err(Error::config("Q.halfspaces", "at least one halfspace required"));
                }
                for h in list {
                    check_len("Q.halfspaces.normal", &h.normal)?;
                    if h.normal.amax() == 0.0 {
                        return Err(Error::config("Q.halfspaces.normal", "must be nonzero"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(
            self,
            SetDescriptor::Box { .. } | SetDescriptor::Ball { .. } | SetDescriptor::Simplex
        )
    }

    /// Membership with a small relative tolerance.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            SetDescriptor::WholeSpace => true,
            SetDescriptor::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol * (1.0 + l.abs()) && *v <= u + tol * (1.0 + u.abs())),
            SetDescriptor::Ball { center, radius } => {
                (x - center).norm() <= radius * (1.0 + tol) + tol
            }
            SetDescriptor::Halfspaces(list) => list
                .iter()
                .all(|h| h.residual(x) <= tol * (1.0 + h.offset.abs() + h.normal.amax() * x.amax())),
            SetDescriptor::Simplex => {
                x.iter().all(|&v| v >= -tol) && (x.sum() - 1.0).abs() <= tol * x.len() as f64
            }
        }
    }

    /// Intersection of two descriptors when it is again a descriptor.
    pub fn intersect(&self, other: &SetDescriptor) -> Result<SetDescriptor> {
        match (self, other) {
            (SetDescriptor::WholeSpace, s) | (s, SetDescriptor::WholeSpace) => Ok(s.clone()),
            (a, b) if a == b => Ok(a.clone()),
            (SetDescriptor::Halfspaces(a), SetDescriptor::Halfspaces(b)) => {
                let mut all = a.clone();
                all.extend(b.iter().filter(|h| !a.contains(h)).cloned());
                Ok(SetDescriptor::Halfspaces(all))
            }
            _ => Err(Error::Capability(format!(
                "intersection of {} and {} is not a supported set",
                self.kind_name(),
                other.kind_name()
            ))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SetDescriptor::WholeSpace => "whole-space",
            SetDescriptor::Box { .. } => "box",
            SetDescriptor::Ball { .. } => "ball",
            SetDescriptor::Halfspaces(_) => "halfspaces",
            SetDescriptor::Simplex => "simplex",
        }
    }

    /// Linear description when the set is polyhedral without bounds on every coordinate.
    pub(crate) fn as_halfspaces(&self) -> Option<Vec<Halfspace>> {
        match self {
            SetDescriptor::WholeSpace => Some(Vec::new()),
            SetDescriptor::Halfspaces(list) => Some(list.clone()),
            _ => None,
        }
    }

    /// Projection `argmin_{x ∈ Q} ½‖x − z‖²_B`.
    pub fn project(&self, metric: &Metric, z: &Vector) -> Result<Vector> {
        match self {
            SetDescriptor::WholeSpace => Ok(z.clone()),
            SetDescriptor::Box { lower, upper } => {
                if metric.diagonal_entries(z.len()).is_none() {
                    return Err(Error::Capability("box projection needs a diagonal metric".into()));
                }
                Ok(Vector::from_iterator(
                    z.len(),
                    z.iter()
                        .zip(lower.iter().zip(upper.iter()))
                        .map(|(v, (l, u))| v.clamp(*l, *u)),
                ))
            }
            SetDescriptor::Ball { center, radius } => {
                if metric.scalar().is_none() {
                    return Err(Error::Capability("ball projection needs B = c·I".into()));
                }
                let d = z - center;
                let n = d.norm();
                if n <= *radius {
                    Ok(z.clone())
                } else {
                    Ok(center + d * (radius / n))
                }
            }
            SetDescriptor::Halfspaces(list) => {
                if list.len() == 1 {
                    Ok(project_halfspace(metric, &list[0], z))
                } else {
                    project_polyhedron(metric, z, list).map(|(x, _)| x)
                }
            }
            SetDescriptor::Simplex => {
                if metric.scalar().is_none() {
                    return Err(Error::Capability("simplex projection needs B = c·I".into()));
                }
                Ok(project_simplex(z))
            }
        }
    }
}

fn project_halfspace(metric: &Metric, h: &Halfspace, z: &Vector) -> Vector {
    let r = h.residual(z);
    if r <= 0.0 {
        return z.clone();
    }
    let w = metric.apply_inv(&h.normal);
    let denom = h.normal.dot(&w);
    z - w * (r / denom)
}

/// Euclidean projection onto the standard simplex (sort-based).
pub fn project_simplex(z: &Vector) -> Vector {
    let mut sorted: Vec<f64> = z.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    z.map(|v| (v - theta).max(0.0))
}

/// Projection of `z` onto `{x : ⟨aⱼ, x⟩ ≤ bⱼ}` in the `B`-metric by enumerating
/// active sets. Returns the point and one multiplier per inequality.
pub(crate) fn project_polyhedron(
    metric: &Metric,
    z: &Vector,
    constraints: &[Halfspace],
) -> Result<(Vector, Vec<f64>)> {
    let m = constraints.len();
    if constraints.iter().all(|h| h.residual(z) <= 0.0) {
        return Ok((z.clone(), vec![0.0; m]));
    }
    if m > MAX_ENUMERATED_CONSTRAINTS {
        return Err(Error::Capability(format!(
            "polyhedral projection limited to {MAX_ENUMERATED_CONSTRAINTS} inequalities, got {m}"
        )));
    }
    let w: Vec<Vector> = constraints.iter().map(|h| metric.apply_inv(&h.normal)).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| constraints[i].normal.dot(&w[j]));
    let residual: Vec<f64> = constraints.iter().map(|h| h.residual(z)).collect();

    // Every active set is scored by its worst scaled KKT violation; the exact
    // projection is the candidate closest to satisfying all conditions.
    let mut best: Option<(f64, Vector, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << m) {
        let active: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let k = active.len();
        let n = z.len();
        let mu = if k == n {
            // A vertex: solve the active equations directly, which stays accurate
            // when the normals are nearly parallel.
            let a = DMatrix::from_fn(n, n, |r, c| constraints[active[r]].normal[c]);
            let b = DVector::from_iterator(n, active.iter().map(|&j| constraints[j].offset));
            let Some(vertex) = a.lu().solve(&b) else { continue };
            let wm = DMatrix::from_fn(n, n, |r, c| w[active[c]][r]);
            let Some(mu) = wm.lu().solve(&(z - &vertex)) else { continue };
            mu
        } else if k > n {
            continue;
        } else {
            let g = DMatrix::from_fn(k, k, |a, b| gram[(active[a], active[b])]);
            let rhs = DVector::from_iterator(k, active.iter().map(|&j| residual[j]));
            let Some(chol) = g.cholesky() else { continue };
            chol.solve(&rhs)
        };
        let scale = mu.amax().max(1.0);
        let negativity = mu.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max) / scale;
        let mut x = z.clone();
        for (a, &j) in active.iter().enumerate() {
            x -= &w[j] * mu[a].max(0.0);
        }
        let violation = constraints
            .iter()
            .map(|h| h.residual(&x).max(0.0) / h.tolerance(&x))
            .fold(0.0, f64::max);
        let score = violation.max(negativity / 1e-12);
        if best.as_ref().is_none_or(|b| score < b.0) {
            let mut multipliers = vec![0.0; m];
            for (a, &j) in active.iter().enumerate() {
                multipliers[j] = mu[a].max(0.0);
            }
            best = Some((score, x, multipliers));
        }
    }
    match best {
        Some((score, x, multipliers)) if score <= 1e2 => Ok((x, multipliers)),
        _ => Err(Error::InfeasibleLevel(format!("no point satisfies the {m} linear inequalities"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_column_slice(c)
    }

    #[test]
    fn simplex_projection_sums_to_one() {
        let p = project_simplex(&v(&[0.9, 0.8, -0.3]));
        assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0], 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.45, epsilon = 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn halfspace_projection_in_metric() {
        let metric = Metric::diagonal(v(&[4.0, 1.0])).unwrap();
        let h = Halfspace::new(v(&[1.0, 1.0]), 0.0);
        let x = SetDescriptor::Halfspaces(vec![h.clone()])
            .project(&metric, &v(&[1.0, 1.0]))
            .unwrap();
        assert_abs_diff_eq!(h.residual(&x), 0.0, epsilon = 1e-15);
        // B(x − z) is parallel to the normal.
        let d = metric.apply(&(x - v(&[1.0, 1.0])));
        assert_abs_diff_eq!(d[0], d[1], epsilon = 1e-15);
    }

    #[test]
    fn polyhedron_corner() {
        let hs = vec![
            Halfspace::new(v(&[1.0, 0.0]), 0.0),
            Halfspace::new(v(&[0.0, 1.0]), 0.0),
        ];
        let (x, mu) = project_polyhedron(&Metric::Identity, &v(&[1.0, 2.0]), &hs).unwrap();
        assert_abs_diff_eq!(x.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mu[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mu[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_polyhedron_is_reported() {
        let hs = vec![
            Halfspace::new(v(&[1.0]), -1.0),
            Halfspace::new(v(&[-1.0]), -1.0),
        ];
        let err = project_polyhedron(&Metric::Identity, &v(&[0.0]), &hs).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLevel(_)));
    }

    #[test]
    fn unsupported_metric_pairs() {
        let dense = Metric::dense(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let bx = SetDescriptor::Box {
            lower: v(&[0.0, 0.0]),
            upper: v(&[1.0, 1.0]),
        };
        assert!(matches!(bx.project(&dense, &v(&[2.0, 2.0])), Err(Error::Capability(_))));
    }
}
