//! Iteration drivers producing full traces.
//!
//! Every driver is deterministic: identical inputs give bit-identical traces.

use crate::dualcert::MultiplierEstimate;
use crate::error::{Error, Result};
use crate::geometry::{DualVector, ProxGeometry, Vector};

mod basic;
mod constrained;
mod unbounded;

pub use basic::{run_basic, run_composite_known_opt, run_polyak_projected};
pub use constrained::{run_double_step, run_switching_i, run_switching_ii, MultiplierMode, SelectionMode, SwitchingOptions};
pub use unbounded::run_unbounded;

/// What an iteration did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Objective,
    /// Step on constraint `i` (1-based, as in `f₁ … f_m`).
    Constraint(usize),
    /// Double-step iteration that accepted the feasibility projection.
    DoubleStepA,
    /// Double-step iteration that took an objective step from the projection.
    DoubleStepB,
}

impl StepKind {
    pub fn label(&self) -> &'static str {
        match self {
            StepKind::Objective => "objective",
            StepKind::Constraint(_) => "constraint",
            StepKind::DoubleStepA => "double-step-2a",
            StepKind::DoubleStepB => "double-step-2b",
        }
    }

    /// Index `i_k`: 0 for objective-type steps, the constraint index otherwise.
    pub fn index(&self) -> usize {
        match self {
            StepKind::Constraint(i) => *i,
            _ => 0,
        }
    }

    pub fn parse(label: &str, index: usize) -> Result<Self> {
        match label {
            "objective" => Ok(StepKind::Objective),
            "constraint" if index >= 1 => Ok(StepKind::Constraint(index)),
            "double-step-2a" => Ok(StepKind::DoubleStepA),
            "double-step-2b" => Ok(StepKind::DoubleStepB),
            _ => Err(Error::config("step_kind", format!("unknown step kind `{label}` with index {index}"))),
        }
    }
}

/// One iteration of a method. Values that do not apply are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub step: StepKind,
    /// Step bound `h_k`.
    pub h: f64,
    /// `τ_k` for bounded methods, `γ_k` for the unbounded method.
    pub scale: f64,
    /// Prox parameter of the step.
    pub lambda: f64,
    /// Weight of the step in the multiplier sums (`λ_k`, or `a_k` for the unbounded method).
    pub weight: f64,
    /// Point at which the oracles were queried (`x_k`, or `y_k` for the double-step and unbounded methods).
    pub point: Vector,
    /// `x_{k+1}`.
    pub next: Vector,
    pub f0: f64,
    pub max_fi: f64,
    /// Composite value `F` at the query point.
    pub composite: f64,
    /// `β(x_k, x_{k+1})`.
    pub breg_step: f64,
    /// Dual norm of the subgradient used for the step.
    pub grad_norm: f64,
    /// Directional proximity measure, when `x*` is known.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The step equation had no solution at iteration `k`: the query point
    /// minimizes the current linear model over the feasible set.
    DirectionallyOptimal { k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    /// Analysis window `[k(N), N)` for the switching-type methods.
    pub window: Option<(usize, usize)>,
    /// Best objective value over the method's designated index set.
    pub best: Option<f64>,
    pub multipliers: Option<MultiplierEstimate>,
    /// Estimates at the doubling checkpoints `N_q = 2^q`.
    pub checkpoints: Vec<MultiplierEstimate>,
}

impl RunResult {
    pub fn final_point(&self) -> Option<&Vector> {
        self.trace.last().map(|r| &r.next)
    }
}

/// `δ_d(p) = ⟨g, p − x*⟩ / ⟨g, d⟩` with `d = (p − next)/‖p − next‖`.
pub(crate) fn proximity(geom: &ProxGeometry, g: &DualVector, point: &Vector, next: &Vector, xstar: Option<&Vector>) -> Option<f64> {
    let xstar = xstar?;
    let step = point - next;
    let len = geom.norm(&step);
    if len == 0.0 {
        return None;
    }
    let along = g.dot(&step) / len;
    if along <= 0.0 {
        return None;
    }
    Some(g.dot(&(point - xstar)) / along)
}

pub(crate) fn require(cond: bool, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Capability(message.to_string()))
    }
}
