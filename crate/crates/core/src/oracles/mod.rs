//! Function oracles and problem instances.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{DualVector, ProxGeometry, Vector};
use crate::sets::SetDescriptor;

pub mod gallery;

pub use gallery::{gallery, gallery_names, gallery_with_seed};

/// Relative tolerance used to decide which max-type components are active.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A closed-form function with a subgradient oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Function {
    /// `⟨a, x⟩ + c`.
    Linear { a: Vector, c: f64 },
    /// `½ xᵀHx + ⟨b, x⟩ + c` with symmetric `H`.
    Quadratic { h: DMatrix<f64>, b: Vector, c: f64 },
    /// `scale·‖x − center‖₂ + offset`.
    Norm { center: Vector, scale: f64, offset: f64 },
    /// `scale·‖x − center‖₁ + offset`.
    L1 { center: Vector, scale: f64, offset: f64 },
    /// `(⟨num, x⟩ + num_c) / (⟨den, x⟩ + den_c)`, quasi-convex where the denominator is positive.
    Ratio { num: Vector, num_c: f64, den: Vector, den_c: f64 },
}

impl Function {
    pub fn dim(&self) -> usize {
        match self {
            Function::Linear { a, .. } => a.len(),
            Function::Quadratic { b, .. } => b.len(),
            Function::Norm { center, .. } | Function::L1 { center, .. } => center.len(),
            Function::Ratio { num, .. } => num.len(),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Function::Ratio { .. })
    }

    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Function::Linear { a, c } => a.dot(x) + c,
            Function::Quadratic { h, b, c } => 0.5 * x.dot(&(h * x)) + b.dot(x) + c,
            Function::Norm { center, scale, offset } => scale * (x - center).norm() + offset,
            Function::L1 { center, scale, offset } => scale * (x - center).lp_norm(1) + offset,
            Function::Ratio { num, num_c, den, den_c } => (num.dot(x) + num_c) / (den.dot(x) + den_c),
        }
    }

    /// Value and one subgradient (gradient where differentiable).
    pub fn eval(&self, x: &Vector) -> (f64, DualVector) {
        match self {
            Function::Linear { a, .. } => (self.value(x), a.clone()),
            Function::Quadratic { h, b, .. } => (self.value(x), h * x + b),
            Function::Norm { center, scale, offset } => {
                let d = x - center;
                let n = d.norm();
                let g = if n > 0.0 { d * (scale / n) } else { DualVector::zeros(x.len()) };
                (scale * n + offset, g)
            }
            Function::L1 { center, scale, offset } => {
                let d = x - center;
                let g = d.map(|v| if v < 0.0 { -scale } else { *scale });
                (scale * d.lp_norm(1) + offset, g)
            }
            Function::Ratio { num, num_c, den, den_c } => {
                let p = num.dot(x) + num_c;
                let q = den.dot(x) + den_c;
                let g = (num * q - den * p) / (q * q);
                (p / q, g)
            }
        }
    }
}

/// Result of evaluating a max-type function.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub subgradient: DualVector,
    /// Index of the component the subgradient belongs to.
    pub active: usize,
}

/// `f(x) = max_i fᵢ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxType {
    pub components: Vec<Function>,
}

/// Affine minorants `fᵢ(x̄) + ⟨fᵢ'(x̄), x − x̄⟩` collected at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub center: Vector,
    pub values: Vec<f64>,
    pub gradients: Vec<DualVector>,
}

impl Linearization {
    /// `ℓ_x̄(x)`.
    pub fn value_at(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        self.values
            .iter()
            .zip(&self.gradients)
            .map(|(v, g)| v + g.dot(&d))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value of the model at its center, `f(x̄)`.
    pub fn center_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl MaxType {
    pub fn single(f: Function) -> Self {
        MaxType { components: vec![f] }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.components
            .iter()
            .map(|f| f.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value with a subgradient from the lowest-index active component.
    pub fn eval(&self, x: &Vector) -> Evaluation {
        let values: Vec<f64> = self.components.iter().map(|f| f.value(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = TIE_TOLERANCE * (1.0 + max.abs());
        let active = values.iter().position(|&v| v >= max - tol).unwrap_or(0);
        let (_, subgradient) = self.components[active].eval(x);
        Evaluation { value: max, subgradient, active }
    }

    pub fn linearize(&self, center: &Vector) -> Linearization {
        let (values, gradients) = self.components.iter().map(|f| f.eval(center)).unzip();
        Linearization { center: center.clone(), values, gradients }
    }

    /// `ℓ_x̄(x) = max_i [fᵢ(x̄) + ⟨fᵢ'(x̄), x − x̄⟩]`.
    pub fn linearization(&self, center: &Vector, x: &Vector) -> f64 {
        self.linearize(center).value_at(x)
    }

    pub fn is_convex(&self) -> bool {
        self.components.iter().all(Function::is_convex)
    }
}

/// Simple convex term `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositeTerm {
    Zero,
    Indicator(SetDescriptor),
    Linear(DualVector),
}

impl CompositeTerm {
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            CompositeTerm::Zero => 0.0,
            CompositeTerm::Indicator(set) => {
                if set.contains(x, 1e-9) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CompositeTerm::Linear(c) => c.dot(x),
        }
    }

    /// Linear part of `ψ` (zero for indicators).
    pub fn linear_part(&self, n: usize) -> DualVector {
        match self {
            CompositeTerm::Linear(c) => c.clone(),
            _ => DualVector::zeros(n),
        }
    }
}

/// Growth function `μ(r)` bounding `f₀(x) − f₀*` on a ball of radius `r` around `x*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `μ(r) = slope·r`.
    Linear { slope: f64 },
    /// `μ(r) = ½ L r² + r‖∇f(x*)‖`.
    Quadratic { lipschitz: f64, gradient_norm: f64 },
}

impl Growth {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Growth::Linear { slope } => slope * r,
            Growth::Quadratic { lipschitz, gradient_norm } => 0.5 * lipschitz * r * r + r * gradient_norm,
        }
    }
}

/// Ground-truth metadata known analytically for a problem instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Truth {
    pub xstar: Option<Vector>,
    /// Optimal value (`F*` for composite problems, `f₀*` otherwise).
    pub fstar: Option<f64>,
    /// Subgradient bounds `Mᵢ` of the constraints.
    pub constraint_bounds: Option<Vec<f64>>,
    /// Subgradient bound `M₀` of the objective.
    pub objective_bound: Option<f64>,
    /// Strict upper bound on the Bregman distance between points of the set.
    pub d: Option<f64>,
    pub d0: Option<f64>,
    /// Gradient Lipschitz constant of the objective components.
    pub smoothness: Option<f64>,
    pub strong_convexity: Option<f64>,
    /// Gradient Lipschitz constant of the constraint components.
    pub constraint_smoothness: Option<f64>,
    pub growth: Option<Growth>,
    pub multipliers: Option<Vec<f64>>,
    pub slater_point: Option<Vector>,
}

/// `min f(x) + ψ(x)` over `Q`, optionally subject to `fᵢ(x) ≤ 0`.
///
/// For the semi-composite form the constraint is `max_i fᵢ(x) + ψ(x) ≤ 0`
/// and `objective` is `f₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub geometry: ProxGeometry,
    pub set: SetDescriptor,
    pub objective: MaxType,
    pub psi: CompositeTerm,
    pub constraints: Vec<Function>,
    pub x0: Vector,
    pub truth: Truth,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Checks dimensions and basic well-posedness.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::config("dimension", "must be positive"));
        }
        if self.objective.components.is_empty() {
            return Err(Error::config("objective.components", "at least one component required"));
        }
        let dims = self
            .objective
            .components
            .iter()
            .chain(self.constraints.iter())
            .map(Function::dim);
        for d in dims {
            if d != n {
                return Err(Error::Dimension { expected: n, got: d });
            }
        }
        if let Some(m) = self.geometry.metric().and_then(|m| m.dim()) {
            if m != n {
                return Err(Error::Dimension { expected: n, got: m });
            }
        }
        self.set.validate(n)?;
        if let CompositeTerm::Indicator(s) = &self.psi {
            s.validate(n)?;
        }
        if let CompositeTerm::Linear(c) = &self.psi {
            if c.len() != n {
                return Err(Error::Dimension { expected: n, got: c.len() });
            }
        }
        if self.geometry.is_entropy() && self.set != SetDescriptor::Simplex {
            return Err(Error::Capability("entropy geometry requires the simplex set".into()));
        }
        if matches!(self.set, SetDescriptor::Simplex) && self.geometry.metric().is_some_and(|m| m.scalar().is_none()) {
            return Err(Error::Capability("simplex with a Euclidean geometry needs B = c·I".into()));
        }
        if let Some(m) = self.geometry.metric() {
            match self.set {
                SetDescriptor::Box { .. } if m.diagonal_entries(n).is_none() => {
                    return Err(Error::Capability("box with a Euclidean geometry needs a diagonal B".into()))
                }
                SetDescriptor::Ball { .. } if m.scalar().is_none() => {
                    return Err(Error::Capability("ball with a Euclidean geometry needs B = c·I".into()))
                }
                _ => {}
            }
        }
        if !self.set.contains(&self.x0, 1e-9) {
            return Err(Error::config("x0", "starting point must lie in Q"));
        }
        self.geometry.check_domain(&self.x0)?;
        Ok(())
    }

    /// Effective feasible set `Q ∩ dom ψ`.
    pub fn domain(&self) -> Result<SetDescriptor> {
        match &self.psi {
            CompositeTerm::Indicator(s) => self.set.intersect(s),
            _ => Ok(self.set.clone()),
        }
    }

    pub fn f0(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    /// `F(x) = f(x) + ψ(x)` for the composite form.
    pub fn composite_value(&self, x: &Vector) -> f64 {
        self.objective.value(x) + self.psi.value(x)
    }

    pub fn constraint_values(&self, x: &Vector) -> Vec<f64> {
        self.constraints.iter().map(|f| f.value(x)).collect()
    }

    /// `max_i fᵢ(x)`, `−∞` without constraints.
    pub fn max_constraint(&self, x: &Vector) -> f64 {
        self.constraints
            .iter()
            .map(|f| f.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Semi-composite constraint `max_i fᵢ(x) + ψ(x)`.
    pub fn semi_composite_constraint(&self, x: &Vector) -> f64 {
        self.max_constraint(x) + self.psi.value(x)
    }

    /// The constraints as a max-type function.
    pub fn constraint_max(&self) -> MaxType {
        MaxType { components: self.constraints.clone() }
    }

    /// Lagrangian `f₀(x) + Σ λᵢ fᵢ(x)`.
    pub fn lagrangian(&self, x: &Vector, lambda: &[f64]) -> f64 {
        self.f0(x)
            + self
                .constraints
                .iter()
                .zip(lambda)
                .map(|(f, l)| l * f.value(x))
                .sum::<f64>()
    }
}
