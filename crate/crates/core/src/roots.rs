//! Bracketed root finding for monotone scalar equations.
//!
//! The quantile inversions in this crate all reduce to solving
//! `g(t) = 0` for a strictly monotone, differentiable `g`. We bisect a
//! verified bracket until it is tight, then polish with Newton steps
//! (falling back to bisection whenever a step leaves the bracket).

use crate::error::{Error, Result};

/// Solve `g(t) = 0` on the bracket `[lo, hi]`, where `g(lo)` and `g(hi)`
/// have opposite signs (either may be zero). `dg` is the derivative.
///
/// Converges to absolute tolerance `tol` on `t`; returns a numeric error
/// naming `what` together with the bracket if the signs do not enclose a
/// root or the iteration budget is exhausted.
pub fn bisect_newton<F, D>(
    mut lo: f64,
    mut hi: f64,
    g: F,
    dg: D,
    tol: f64,
    what: &str,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !g_lo.is_finite() || !g_hi.is_finite() || g_lo.signum() == g_hi.signum() {
        return Err(Error::numeric(format!(
            "{what}: no sign change on bracket [{lo}, {hi}] (g = {g_lo}, {g_hi})"
        )));
    }

    // Bisection until the bracket is small enough for Newton to be safe.
    let mut t;
    for _ in 0..200 {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        t = 0.5 * (lo + hi);
        let gt = g(t);
        if gt == 0.0 {
            return Ok(t);
        }
        if gt.signum() == g_lo.signum() {
            lo = t;
            g_lo = gt;
        } else {
            hi = t;
        }
        if hi - lo < 1e-4 * (1.0 + t.abs()) {
            break;
        }
    }

    // Newton refinement inside the bracket.
    t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let gt = g(t);
        if gt == 0.0 {
            return Ok(t);
        }
        if gt.signum() == g_lo.signum() {
            lo = t;
        } else {
            hi = t;
        }
        let d = dg(t);
        let mut step = if d != 0.0 && d.is_finite() {
            gt / d
        } else {
            f64::INFINITY
        };
        let mut next = t - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
            step = t - next;
        }
        t = next;
        if step.abs() <= tol * (1.0 + t.abs()) || hi - lo <= tol * (1.0 + t.abs()) {
            return Ok(t);
        }
    }
    Err(Error::numeric(format!(
        "{what}: no convergence on bracket [{lo}, {hi}]"
    )))
}

/// Grow `hi` geometrically from `start` until `pred(hi)` holds.
///
/// Used to establish the upper end of a quantile bracket. Errors if the
/// predicate never triggers before `max` doublings.
pub fn grow_until<F>(start: f64, factor: f64, max: usize, pred: F, what: &str) -> Result<f64>
where
    F: Fn(f64) -> bool,
{
    let mut hi = start;
    for _ in 0..max {
        if pred(hi) {
            return Ok(hi);
        }
        hi *= factor;
    }
    Err(Error::numeric(format!(
        "{what}: bracket growth exhausted at {hi}"
    )))
}
