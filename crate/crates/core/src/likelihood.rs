//! Log-likelihood of the tempered limit model and the fixed-`tau`
//! pseudo maximum likelihood fit.
//!
//! For POT ratios `v(1..k)` the log-likelihood is
//!
//! ```text
//! l(alpha, lambda) = -(1+alpha) sum log v - lambda sum (v^tau - 1)
//!                    + sum log(alpha + lambda tau v^tau),
//! ```
//!
//! maximised over `(alpha, lambda)` at each grid value of `tau` by a
//! Nelder–Mead search on `(log alpha, log(lambda + eps))`, with the
//! lambda axis floored at zero. `tau` is never a free variable: jointly
//! with `alpha` it is badly identified for small `tau`, which is the
//! reason for the grid in the first place.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::nelder_mead;
use crate::pot::PotView;

const LAMBDA_EPS: f64 = 1e-10;
const SIMPLEX_TOL: f64 = 1e-9;
const MAX_ITER: usize = 500;
// box for the log-scale search coordinates: the likelihood can be
// maximised on the alpha -> 0 boundary (pure Weibull tempering), where
// the search would otherwise drift indefinitely; 1e-8 mirrors the floor
// the WLS fit puts on 1/alpha
const LOG_BOX: (f64, f64) = (-18.420680743952367, 18.420680743952367);

/// Result of the fixed-`tau` likelihood maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub alpha: f64,
    pub lambda: f64,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Log-likelihood of the POT ratios at `(alpha, lambda, tau)`.
pub fn log_likelihood(pot: &PotView, alpha: f64, lambda: f64, tau: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite())
        || !(lambda >= 0.0 && lambda.is_finite())
        || !(tau > 0.0 && tau.is_finite())
    {
        return Err(Error::domain(format!(
            "log_likelihood: need alpha > 0, lambda >= 0, tau > 0, got ({alpha}, {lambda}, {tau})"
        )));
    }
    let mut powers = Vec::new();
    pot.powers_into(tau, &mut powers);
    Ok(loglik_with_powers(pot, alpha, lambda, tau, &powers))
}

pub(crate) fn loglik_with_powers(
    pot: &PotView,
    alpha: f64,
    lambda: f64,
    tau: f64,
    powers: &[f64],
) -> f64 {
    let sum_log: f64 = pot.log_ratios().iter().sum();
    let mut sum_excess = 0.0;
    let mut sum_log_mix = 0.0;
    for &e in powers {
        sum_excess += e - 1.0;
        sum_log_mix += (alpha + lambda * tau * e).ln();
    }
    -(1.0 + alpha) * sum_log - lambda * sum_excess + sum_log_mix
}

/// Score (gradient) of the log-likelihood in `(alpha, lambda)`,
/// normalised by `k`. At an interior maximum both components vanish.
pub fn score_alpha_lambda(pot: &PotView, alpha: f64, lambda: f64, tau: f64) -> Result<[f64; 2]> {
    if !(alpha > 0.0 && alpha.is_finite())
        || !(lambda >= 0.0 && lambda.is_finite())
        || !(tau > 0.0 && tau.is_finite())
    {
        return Err(Error::domain("score: invalid parameters".to_string()));
    }
    let mut powers = Vec::new();
    pot.powers_into(tau, &mut powers);
    Ok(score_with_powers(pot, alpha, lambda, tau, &powers))
}

pub(crate) fn score_with_powers(
    pot: &PotView,
    alpha: f64,
    lambda: f64,
    tau: f64,
    powers: &[f64],
) -> [f64; 2] {
    let k = pot.k() as f64;
    let mut s_alpha = 0.0;
    let mut s_lambda = 0.0;
    for (&e, &y) in powers.iter().zip(pot.log_ratios()) {
        let mix = alpha + lambda * tau * e;
        s_alpha += 1.0 / mix - y;
        s_lambda += tau * e / mix - (e - 1.0);
    }
    [s_alpha / k, s_lambda / k]
}

/// Maximise the log-likelihood over `(alpha, lambda)` at fixed `tau`,
/// starting from `init` (the WLS estimates, with `lambda = delta/tau`).
///
/// Non-convergence is flagged, not fatal: the best iterate is returned.
pub fn fit_mle_fixed_tau(pot: &PotView, tau: f64, init: (f64, f64)) -> Result<MleFit> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau must be positive: {tau}")));
    }
    let mut powers = Vec::new();
    pot.powers_into(tau, &mut powers);
    fit_mle_with_powers(pot, tau, init, &powers)
}

pub(crate) fn fit_mle_with_powers(
    pot: &PotView,
    tau: f64,
    init: (f64, f64),
    powers: &[f64],
) -> Result<MleFit> {
    let (alpha0, lambda0) = init;
    if !(alpha0 > 0.0 && alpha0.is_finite()) || !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return Err(Error::domain(format!(
            "MLE init must satisfy alpha > 0, lambda >= 0, got ({alpha0}, {lambda0})"
        )));
    }

    let x0 = [
        alpha0.ln().clamp(LOG_BOX.0, LOG_BOX.1),
        (lambda0 + LAMBDA_EPS).ln().clamp(LOG_BOX.0, LOG_BOX.1),
    ];
    let neg_ll = |x: &[f64]| {
        let alpha = x[0].clamp(LOG_BOX.0, LOG_BOX.1).exp();
        let lambda = (x[1].clamp(LOG_BOX.0, LOG_BOX.1).exp() - LAMBDA_EPS).max(0.0);
        -loglik_with_powers(pot, alpha, lambda, tau, powers)
    };

    // The simplex can collapse along a curved valley before reaching the
    // optimum; restarting from the solution with a fresh simplex escapes
    // such stalls. Stop once a restart no longer moves the point.
    let mut r = nelder_mead(neg_ll, &x0, 0.5, SIMPLEX_TOL, MAX_ITER);
    let mut iterations = r.iterations;
    for _ in 0..3 {
        let again = nelder_mead(neg_ll, &r.x, 1e-3, SIMPLEX_TOL, MAX_ITER);
        iterations += again.iterations;
        let moved = r
            .x
            .iter()
            .zip(&again.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        let improved = r.value - again.value;
        if again.value <= r.value {
            r = again;
        }
        if moved < 1e-8 && improved < 1e-12 {
            break;
        }
    }
    r.iterations = iterations;

    let alpha = r.x[0].clamp(LOG_BOX.0, LOG_BOX.1).exp();
    let lambda = (r.x[1].clamp(LOG_BOX.0, LOG_BOX.1).exp() - LAMBDA_EPS).max(0.0);
    let loglik = -r.value;
    if !loglik.is_finite() {
        return Err(Error::numeric(format!(
            "likelihood not finite at fitted point (alpha={alpha}, lambda={lambda}, tau={tau})"
        )));
    }
    Ok(MleFit {
        alpha,
        lambda,
        loglik,
        converged: r.converged,
        iterations: r.iterations,
    })
}
