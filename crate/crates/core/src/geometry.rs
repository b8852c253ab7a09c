//! Norms, prox functions and Bregman distances.
//!
//! Two prox functions are shipped: the quadratic `d(x) = ½‖x‖²_B` for a
//! positive-definite metric `B`, and the entropy `d(x) = Σ xᵢ ln xᵢ` on the
//! standard simplex. Both are strongly convex with parameter one with respect
//! to their paired norm (`‖·‖_B` and `ℓ1` respectively), and both produce a
//! Bregman distance that is convex in its first argument.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Primal points.
pub type Vector = DVector<f64>;
/// Linear functionals (subgradients) on the primal space.
pub type DualVector = DVector<f64>;

/// Coordinates below this value are lifted to it after every entropy prox map.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Symmetric positive-definite operator `B` defining `‖x‖_B = ⟨Bx, x⟩^½`.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Identity,
    Diagonal(DVector<f64>),
    Dense { b: DMatrix<f64>, b_inv: DMatrix<f64> },
}

impl Metric {
    pub fn diagonal(entries: DVector<f64>) -> Result<Self> {
        if entries.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::config("B", "diagonal metric entries must be finite and positive"));
        }
        Ok(Metric::Diagonal(entries))
    }

    /// Builds a dense metric. The matrix is symmetrized and must be positive definite.
    pub fn dense(b: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::config("B", "metric matrix must be square"));
        }
        let asym = (&b - b.transpose()).amax();
        if asym > 1e-12 * b.amax().max(1.0) {
            return Err(Error::config("B", "metric matrix must be symmetric"));
        }
        let b = (&b + b.transpose()) * 0.5;
        let chol = b
            .clone()
            .cholesky()
            .ok_or_else(|| Error::config("B", "metric matrix must be positive definite"))?;
        let b_inv = chol.inverse();
        let b_inv = (&b_inv + b_inv.transpose()) * 0.5;
        Ok(Metric::Dense { b, b_inv })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Metric::Identity => None,
            Metric::Diagonal(d) => Some(d.len()),
            Metric::Dense { b, .. } => Some(b.nrows()),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match self {
            Metric::Identity => x.clone(),
            Metric::Diagonal(d) => x.component_mul(d),
            Metric::Dense { b, .. } => b * x,
        }
    }

    pub fn apply_inv(&self, g: &DualVector) -> Vector {
        match self {
            Metric::Identity => g.clone(),
            Metric::Diagonal(d) => g.component_div(d),
            Metric::Dense { b_inv, .. } => b_inv * g,
        }
    }

    pub fn norm_sq(&self, x: &Vector) -> f64 {
        match self {
            Metric::Identity => x.norm_squared(),
            Metric::Diagonal(d) => x.iter().zip(d.iter()).map(|(v, w)| w * v * v).sum(),
            Metric::Dense { b, .. } => x.dot(&(b * x)),
        }
    }

    pub fn dual_norm_sq(&self, g: &DualVector) -> f64 {
        match self {
            Metric::Identity => g.norm_squared(),
            Metric::Diagonal(d) => g.iter().zip(d.iter()).map(|(v, w)| v * v / w).sum(),
            Metric::Dense { b_inv, .. } => g.dot(&(b_inv * g)),
        }
    }

    /// `Some(c)` when `B = c·I`.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Metric::Identity => Some(1.0),
            Metric::Diagonal(d) => {
                let first = d[0];
                d.iter().all(|&v| v == first).then_some(first)
            }
            Metric::Dense { .. } => None,
        }
    }

    /// Diagonal entries of `B` when `B` is diagonal.
    pub fn diagonal_entries(&self, n: usize) -> Option<DVector<f64>> {
        match self {
            Metric::Identity => Some(DVector::from_element(n, 1.0)),
            Metric::Diagonal(d) => Some(d.clone()),
            Metric::Dense { .. } => None,
        }
    }
}

/// A prox function together with the norm it is strongly convex for.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxGeometry {
    /// `d(x) = ½‖x‖²_B`, paired with `‖·‖_B`.
    Euclidean(Metric),
    /// `d(x) = Σ xᵢ ln xᵢ` on the simplex, paired with `ℓ1` / `ℓ∞`.
    Entropy,
}

impl ProxGeometry {
    pub fn euclidean() -> Self {
        ProxGeometry::Euclidean(Metric::Identity)
    }

    pub fn is_entropy(&self) -> bool {
        matches!(self, ProxGeometry::Entropy)
    }

    pub fn metric(&self) -> Option<&Metric> {
        match self {
            ProxGeometry::Euclidean(m) => Some(m),
            ProxGeometry::Entropy => None,
        }
    }

    pub fn check_domain(&self, x: &Vector) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if let ProxGeometry::Entropy = self {
            if let Some(i) = x.iter().position(|&v| v <= 0.0) {
                return Err(Error::Domain(format!(
                    "entropy prox needs strictly positive coordinates, x[{i}] = {}",
                    x[i]
                )));
            }
        }
        Ok(())
    }

    /// Value of the prox function.
    pub fn prox_function(&self, x: &Vector) -> f64 {
        match self {
            ProxGeometry::Euclidean(m) => 0.5 * m.norm_sq(x),
            ProxGeometry::Entropy => x.iter().map(|&v| xlnx(v)).sum(),
        }
    }

    /// Gradient of the prox function.
    pub fn prox_gradient(&self, x: &Vector) -> Result<DualVector> {
        match self {
            ProxGeometry::Euclidean(m) => Ok(m.apply(x)),
            ProxGeometry::Entropy => {
                self.check_domain(x)?;
                Ok(x.map(|v| v.ln() + 1.0))
            }
        }
    }

    /// `β_d(x, y) = d(y) − d(x) − ⟨∇d(x), y − x⟩`.
    pub fn bregman(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_same_dim(x, y)?;
        match self {
            ProxGeometry::Euclidean(m) => Ok(0.5 * m.norm_sq(&(y - x))),
            ProxGeometry::Entropy => {
                self.check_domain(x)?;
                if let Some(i) = y.iter().position(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::Domain(format!("entropy target has y[{i}] = {}", y[i])));
                }
                let value: f64 = x
                    .iter()
                    .zip(y.iter())
                    .map(|(&xi, &yi)| {
                        let t = if yi > 0.0 { yi * (yi / xi).ln() } else { 0.0 };
                        t - yi + xi
                    })
                    .sum();
                Ok(value.max(0.0))
            }
        }
    }

    /// Norm the prox function is strongly convex with.
    pub fn norm(&self, x: &Vector) -> f64 {
        match self {
            ProxGeometry::Euclidean(m) => m.norm_sq(x).max(0.0).sqrt(),
            ProxGeometry::Entropy => x.iter().map(|v| v.abs()).sum(),
        }
    }

    pub fn dual_norm(&self, g: &DualVector) -> f64 {
        match self {
            ProxGeometry::Euclidean(m) => m.dual_norm_sq(g).max(0.0).sqrt(),
            ProxGeometry::Entropy => g.amax(),
        }
    }

    /// Slack of the first-argument convexity inequality
    /// `α β(u1,x) + (1−α) β(u2,x) − β(α u1 + (1−α) u2, x)`.
    pub fn first_arg_convexity_slack(
        &self,
        u1: &Vector,
        u2: &Vector,
        x: &Vector,
        alpha: f64,
    ) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config("alpha", "must lie in [0, 1]"));
        }
        let mix = u1 * alpha + u2 * (1.0 - alpha);
        let lhs = self.bregman(&mix, x)?;
        let rhs = alpha * self.bregman(u1, x)? + (1.0 - alpha) * self.bregman(u2, x)?;
        Ok(rhs - lhs)
    }

    pub fn first_arg_convexity_check(
        &self,
        u1: &Vector,
        u2: &Vector,
        x: &Vector,
        alpha: f64,
    ) -> Result<bool> {
        Ok(self.first_arg_convexity_slack(u1, u2, x, alpha)? >= -1e-12)
    }
}

fn xlnx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

pub(crate) fn check_same_dim(x: &Vector, y: &Vector) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_column_slice(c)
    }

    #[test]
    fn euclidean_bregman_values() {
        let g = ProxGeometry::euclidean();
        assert_eq!(g.bregman(&v(&[1.0, 2.0]), &v(&[1.0, 2.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(g.bregman(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 12.5);
    }

    #[test]
    fn entropy_bregman_closed_form() {
        let g = ProxGeometry::Entropy;
        let expected = 0.25 * 0.5f64.ln() + 0.75 * 1.5f64.ln();
        let got = g.bregman(&v(&[0.5, 0.5]), &v(&[0.25, 0.75])).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.13081, epsilon = 1e-5);
    }

    #[test]
    fn entropy_rejects_boundary_center() {
        let g = ProxGeometry::Entropy;
        let err = g.bregman(&v(&[0.0, 1.0]), &v(&[0.5, 0.5])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn dual_norms() {
        assert_abs_diff_eq!(ProxGeometry::euclidean().dual_norm(&v(&[3.0, 4.0])), 5.0);
        let diag = ProxGeometry::Euclidean(Metric::diagonal(v(&[4.0, 1.0])).unwrap());
        assert_abs_diff_eq!(diag.dual_norm(&v(&[2.0, 0.0])), 1.0);
        assert_abs_diff_eq!(ProxGeometry::Entropy.dual_norm(&v(&[1.0, -3.0])), 3.0);
    }

    #[test]
    fn dense_metric_matches_diagonal() {
        let dense = Metric::dense(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        let diag = Metric::diagonal(v(&[4.0, 1.0])).unwrap();
        let g = v(&[0.3, -1.7]);
        assert_abs_diff_eq!(dense.dual_norm_sq(&g), diag.dual_norm_sq(&g), epsilon = 1e-14);
        assert!(Metric::dense(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(Metric::dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }

    #[test]
    fn first_arg_convexity_examples() {
        let e = ProxGeometry::euclidean();
        let (u1, u2, x) = (v(&[0.0, 0.0]), v(&[2.0, 0.0]), v(&[1.0, 0.0]));
        assert!(e.first_arg_convexity_check(&u1, &u2, &x, 0.0).unwrap());
        assert_abs_diff_eq!(e.first_arg_convexity_slack(&u1, &u2, &x, 0.5).unwrap(), 0.5);
        let h = ProxGeometry::Entropy;
        assert!(h
            .first_arg_convexity_check(&v(&[0.2, 0.8]), &v(&[0.8, 0.2]), &v(&[0.5, 0.5]), 0.3)
            .unwrap());
    }
}
