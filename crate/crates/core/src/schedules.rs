//! Step-bound and scaling sequences.
//!
//! A [`StepSchedule`] produces scaling coefficients `τ_k` and step bounds
//! `h_k = scale·τ_k`; a [`GammaSchedule`] produces the increasing weights
//! `γ_k` of the method for unbounded sets.

use std::sync::RwLock;

use crate::error::{Error, Result};

/// Relative slack when comparing partial sums of `τ²` against one.
const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `τ_k = 1/√(N+1)` for a fixed horizon `N`.
    Constant { horizon: usize },
    /// `τ_k = √(2/(k+1))`.
    InverseSqrt,
    /// Explicit nonincreasing positive values; queries past the end are errors.
    UserList(Vec<f64>),
}

#[derive(Debug)]
pub struct StepSchedule {
    kind: ScheduleKind,
    scale: f64,
    /// `prefix[j] = Σ_{i<j} τ_i²`, grown on demand.
    prefix: RwLock<Vec<f64>>,
}

impl Clone for StepSchedule {
    fn clone(&self) -> Self {
        StepSchedule {
            kind: self.kind.clone(),
            scale: self.scale,
            prefix: RwLock::new(self.prefix.read().expect("prefix lock").clone()),
        }
    }
}

impl PartialEq for StepSchedule {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.scale == other.scale
    }
}

impl StepSchedule {
    pub fn new(kind: ScheduleKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Schedule(format!("scale must be positive, got {scale}")));
        }
        if let ScheduleKind::UserList(values) = &kind {
            if values.is_empty() {
                return Err(Error::Schedule("user list is empty".into()));
            }
            if values.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
                return Err(Error::Schedule("user list entries must be positive".into()));
            }
            if let Some(k) = values.windows(2).position(|w| w[1] > w[0]) {
                return Err(Error::Schedule(format!("user list increases at index {}", k + 1)));
            }
        }
        Ok(StepSchedule { kind, scale, prefix: RwLock::new(vec![0.0]) })
    }

    /// `h_k = √(2D)·τ_k`.
    pub fn with_diameter(kind: ScheduleKind, d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::Schedule(format!("D must be positive, got {d}")));
        }
        Self::new(kind, (2.0 * d).sqrt())
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest index the schedule is defined for.
    pub fn horizon(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::UserList(v) => Some(v.len() - 1),
            _ => None,
        }
    }

    pub fn tau_sq(&self, k: usize) -> Result<f64> {
        match &self.kind {
            ScheduleKind::Constant { horizon } => Ok(1.0 / (*horizon as f64 + 1.0)),
            ScheduleKind::InverseSqrt => Ok(2.0 / (k as f64 + 1.0)),
            ScheduleKind::UserList(v) => v
                .get(k)
                .map(|t| t * t)
                .ok_or_else(|| Error::Schedule(format!("index {k} beyond user list of length {}", v.len()))),
        }
    }

    pub fn tau(&self, k: usize) -> Result<f64> {
        match &self.kind {
            ScheduleKind::UserList(v) => self.tau_sq(k).map(|_| v[k]),
            _ => self.tau_sq(k).map(f64::sqrt),
        }
    }

    pub fn h(&self, k: usize) -> Result<f64> {
        Ok(self.scale * self.tau(k)?)
    }

    fn prefix_upto(&self, j: usize) -> Result<f64> {
        if let Some(&p) = self.prefix.read().expect("prefix lock").get(j) {
            return Ok(p);
        }
        let mut prefix = self.prefix.write().expect("prefix lock");
        while prefix.len() <= j {
            let i = prefix.len() - 1;
            let next = prefix[i] + self.tau_sq(i)?;
            prefix.push(next);
        }
        Ok(prefix[j])
    }

    /// Minimal `a ≥ 0` with `Σ_{i=k}^{k+a} τ_i² ≥ 1`.
    pub fn divergence_delay(&self, k: usize) -> Result<usize> {
        let base = self.prefix_upto(k)?;
        let reached = |j: usize| -> Result<bool> { Ok(self.prefix_upto(j)? - base >= 1.0 - SUM_TOLERANCE) };
        // Find j > k with the window [k, j) reaching one, doubling the search range.
        let mut hi = k + 1;
        let mut lo = k;
        while !reached(hi)? {
            lo = hi;
            hi = k + 2 * (hi - k);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reached(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi - k - 1)
    }

    /// `k(N) = max{k ≥ 0 : k + a(k) ≤ N − 1}`.
    pub fn window_start(&self, n: usize) -> Result<usize> {
        let minimum = 1 + self.divergence_delay(0)?;
        if n < minimum {
            return Err(Error::HorizonTooShort { horizon: n, minimum });
        }
        // k + a(k) is nondecreasing in k.
        let fits = |k: usize| -> Result<bool> { Ok(k + self.divergence_delay(k)? < n) };
        let (mut lo, mut hi) = (0usize, n);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GammaSchedule {
    /// `γ_k = √k`.
    Sqrt,
    /// Explicit strictly increasing values with `γ₀ ≥ 0`.
    UserList(Vec<f64>),
}

impl GammaSchedule {
    pub fn user_list(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Schedule("gamma list needs at least two values".into()));
        }
        if !(values[0] >= 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schedule("gamma values must be finite with gamma_0 >= 0".into()));
        }
        if let Some(k) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Schedule(format!("gamma list is not strictly increasing at index {}", k + 1)));
        }
        Ok(GammaSchedule::UserList(values))
    }

    pub fn gamma(&self, k: usize) -> Result<f64> {
        match self {
            GammaSchedule::Sqrt => Ok((k as f64).sqrt()),
            GammaSchedule::UserList(v) => v
                .get(k)
                .copied()
                .ok_or_else(|| Error::Schedule(format!("index {k} beyond gamma list of length {}", v.len()))),
        }
    }

    /// `γ_{k+1}(γ_{k+1} − γ_k)`.
    pub fn increment_weight(&self, k: usize) -> Result<f64> {
        let (a, b) = (self.gamma(k)?, self.gamma(k + 1)?);
        Ok(b * (b - a))
    }

    /// `Σ_N = (1/γ_N) Σ_{k<N} √(γ_{k+1}(γ_{k+1} − γ_k))`.
    pub fn sigma(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for k in 0..n {
            total += self.increment_weight(k)?.sqrt();
        }
        Ok(total / self.gamma(n)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_schedule_delay_is_horizon() {
        let s = StepSchedule::new(ScheduleKind::Constant { horizon: 4 }, 1.0).unwrap();
        for k in 0..10 {
            assert_eq!(s.divergence_delay(k).unwrap(), 4);
        }
        assert_eq!(s.window_start(5).unwrap(), 0);
        assert!(matches!(s.window_start(4), Err(Error::HorizonTooShort { horizon: 4, minimum: 5 })));
    }

    #[test]
    fn inverse_sqrt_delays() {
        let s = StepSchedule::new(ScheduleKind::InverseSqrt, 1.0).unwrap();
        assert_eq!(s.divergence_delay(0).unwrap(), 0);
        assert_eq!(s.divergence_delay(1).unwrap(), 0);
        assert_eq!(s.divergence_delay(2).unwrap(), 1);
        assert_eq!(s.window_start(2).unwrap(), 1);
        assert!(s.window_start(20).unwrap() >= 10);
        assert!(matches!(s.window_start(0), Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn user_list_validation() {
        assert!(StepSchedule::new(ScheduleKind::UserList(vec![1.0, 2.0]), 1.0).is_err());
        let s = StepSchedule::new(ScheduleKind::UserList(vec![1.0, 0.5]), 2.0).unwrap();
        assert_eq!(s.h(1).unwrap(), 1.0);
        assert!(s.tau(2).is_err());
        assert!(GammaSchedule::user_list(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn sqrt_gamma_first_weight() {
        let g = GammaSchedule::Sqrt;
        assert_eq!(g.increment_weight(0).unwrap(), 1.0);
        assert!((g.sigma(1).unwrap() - 1.0).abs() < 1e-15);
    }
}
