//! Scalar root finding for monotone equations.

use crate::error::{Error, Result};

/// Largest number of bracket doublings before giving up.
pub const MAX_DOUBLINGS: usize = 200;
const MAX_ITERATIONS: usize = 400;

/// Solves `f(x) = target` for a convex nondecreasing `f` on `[lo, hi]` with
/// `f(lo) ≤ target ≤ f(hi)`. `eval` returns `(f(x), f'(x))`.
///
/// Newton steps are taken from the right end of the bracket, where they are
/// monotone for convex increasing functions; bisection is used whenever a
/// step leaves the bracket or stalls.
pub fn newton_bisect<F>(mut eval: F, mut lo: f64, mut hi: f64, target: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let tol = rel_tol * target.abs().max(f64::MIN_POSITIVE);
    let mut x = hi;
    let (mut fx, mut dfx) = eval(x)?;
    for _ in 0..MAX_ITERATIONS {
        let r = fx - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            return Ok(if r > 0.0 { lo } else { x });
        }
        let mut next = if dfx > 0.0 { x - r / dfx } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        x = next;
        (fx, dfx) = eval(x)?;
    }
    Err(Error::RootSearch(format!(
        "no convergence in {MAX_ITERATIONS} iterations on [{lo}, {hi}]"
    )))
}

/// Finds the smallest `x` in `[lo, hi]` (to machine resolution) with `pred(x)` true,
/// for a predicate that is false on a prefix and true on the rest.
pub fn bisect_threshold<P>(mut pred: P, mut lo: f64, mut hi: f64) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_on_square() {
        let root = newton_bisect(|x| Ok((x * x, 2.0 * x)), 0.0, 4.0, 2.0, 1e-14).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn newton_on_kinked_function() {
        let f = |x: f64| Ok(if x < 1.0 { (0.0, 0.0) } else { ((x - 1.0).powi(2), 2.0 * (x - 1.0)) });
        let root = newton_bisect(f, 0.0, 8.0, 0.25, 1e-14).unwrap();
        assert!((root - 1.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_search() {
        let t = bisect_threshold(|x| Ok(x >= 0.3), 0.0, 1.0).unwrap();
        assert!((t - 0.3).abs() < 1e-15);
    }
}
