//! Primal subgradient methods with dual step-size control.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod dualcert;
pub mod geometry;
pub mod harness;
pub mod oracles;
pub mod proxmaps;
pub mod rootfind;
pub mod schedules;
pub mod solvers;
pub mod sets;

pub use error::{Error, Result};
pub use geometry::{DualVector, Metric, ProxGeometry, Vector};
pub use oracles::{CompositeTerm, Function, MaxType, ProblemInstance, Truth};
pub use proxmaps::ProxStepResult;
pub use schedules::{GammaSchedule, ScheduleKind, StepSchedule};
pub use sets::{Halfspace, SetDescriptor};
pub use dualcert::{DualCertificate, MultiplierEstimate};
pub use solvers::{IterationRecord, RunResult, StepKind, Termination};
pub use harness::{ExperimentReport, Method, ProblemSource, RunConfig, Tolerances};
