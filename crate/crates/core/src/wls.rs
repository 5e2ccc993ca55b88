//! Weighted least squares fitting of the tempered QQ relation.
//!
//! On QQ scale the tempered model predicts, for the `i`-th largest excess
//! ratio with abscissa `q(i)`,
//!
//! ```text
//! (1/alpha) * q(i)  ~  log v(i) + delta * h_tau(v(i)),
//! ```
//!
//! so at fixed `tau` the objective
//!
//! ```text
//! WLS(alpha, delta) = sum_i w(i) * ((1/alpha) q(i) - log v(i) - delta h_tau(v(i)))^2
//! ```
//!
//! is an ordinary weighted linear least-squares problem in
//! `(1/alpha, delta)`, solved from its 2x2 normal equations with `delta`
//! clamped at zero (no anti-tempering) and `1/alpha` floored at `1e-8`.
//! With the default weights `w(i) = 1/q(i)` and `delta = 0` the minimiser
//! over `alpha` alone is exactly the reciprocal Hill estimator, because
//! the abscissas sum to `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pot::PotView;

/// Weighting of the QQ residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// `w(i) = 1/q(i)`: reproduces the Hill estimator when `delta = 0`.
    Hill,
    /// Unit weights.
    Uniform,
}

impl WeightScheme {
    #[inline]
    fn weight(&self, position: f64) -> f64 {
        match self {
            WeightScheme::Hill => 1.0 / position,
            WeightScheme::Uniform => 1.0,
        }
    }
}

/// Result of the fixed-`tau` weighted least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlsFit {
    pub alpha: f64,
    /// Tempering slope `delta = tau * lambda`, non-negative.
    pub delta: f64,
    pub objective: f64,
}

/// The weighted QQ objective at the given parameters.
pub fn wls_objective(
    pot: &PotView,
    alpha: f64,
    delta: f64,
    tau: f64,
    weights: WeightScheme,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(delta >= 0.0 && delta.is_finite())
        || !(tau > 0.0 && tau.is_finite())
    {
        return Err(Error::domain(format!(
            "wls_objective: need alpha > 0, delta >= 0, tau > 0, got ({alpha}, {delta}, {tau})"
        )));
    }
    let mut powers = Vec::new();
    pot.powers_into(tau, &mut powers);
    Ok(objective_with_powers(pot, alpha, delta, tau, &powers, weights))
}

pub(crate) fn objective_with_powers(
    pot: &PotView,
    alpha: f64,
    delta: f64,
    tau: f64,
    powers: &[f64],
    weights: WeightScheme,
) -> f64 {
    let g = 1.0 / alpha;
    let mut total = 0.0;
    for i in 0..pot.k() {
        let q = pot.positions()[i];
        let h = (powers[i] - 1.0) / tau;
        let r = g * q - pot.log_ratios()[i] - delta * h;
        total += weights.weight(q) * r * r;
    }
    total
}

/// Minimise the WLS objective over `alpha > 0`, `delta >= 0` at fixed `tau`.
///
/// Requires `k >= 3`. Errors when the design is singular (all ratios tied
/// at the threshold, or ramp collinear with the abscissas).
pub fn fit_wls_fixed_tau(pot: &PotView, tau: f64, weights: WeightScheme) -> Result<WlsFit> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau must be positive: {tau}")));
    }
    let mut powers = Vec::new();
    pot.powers_into(tau, &mut powers);
    fit_wls_with_powers(pot, tau, &powers, weights)
}

pub(crate) fn fit_wls_with_powers(
    pot: &PotView,
    tau: f64,
    powers: &[f64],
    weights: WeightScheme,
) -> Result<WlsFit> {
    let k = pot.k();
    if k < 3 {
        return Err(Error::domain(format!("WLS fit needs k >= 3, got {k}")));
    }

    let mut sqq = 0.0;
    let mut sqh = 0.0;
    let mut shh = 0.0;
    let mut sqy = 0.0;
    let mut shy = 0.0;
    for i in 0..k {
        let q = pot.positions()[i];
        let y = pot.log_ratios()[i];
        let h = (powers[i] - 1.0) / tau;
        let w = weights.weight(q);
        sqq += w * q * q;
        sqh += w * q * h;
        shh += w * h * h;
        sqy += w * q * y;
        shy += w * h * y;
    }

    if shh == 0.0 {
        // all ratios equal 1: no slope information at all
        return Err(Error::degenerate(
            "all POT ratios are tied at the threshold",
        ));
    }
    let det = sqq * shh - sqh * sqh;
    if det <= 1e-13 * sqq * shh {
        return Err(Error::degenerate(
            "singular WLS normal equations (collinear design)",
        ));
    }

    // unconstrained minimiser in (g, d) = (1/alpha, delta)
    let mut d = (sqh * sqy - sqq * shy) / det;
    let mut g = (sqy + d * sqh) / sqq;
    if d < 0.0 {
        d = 0.0;
        g = sqy / sqq;
    }
    if g <= 0.0 {
        g = 1e-8;
    }
    let alpha = 1.0 / g;
    let objective = objective_with_powers(pot, alpha, d, tau, powers, weights);
    Ok(WlsFit {
        alpha,
        delta: d,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pot::{hill, PotView};
    use crate::sample::Sample;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(rng: &mut ChaCha8Rng, n: usize) -> Sample {
        // heavy-tailed-ish positive data
        Sample::new(
            (0..n)
                .map(|_| (1.0 - rng.gen::<f64>()).powf(-0.8) * (1.0 + rng.gen::<f64>()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn hill_recovery_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_sample(&mut rng, 300);
        for k in [3, 7, 50, 150, 299] {
            let pot = PotView::from_sample(&s, k).unwrap();
            let h = hill(&s, k).unwrap();
            // minimise over alpha alone with delta = 0: closed form sum(w q y)/sum(w q q)
            let g = pot
                .positions()
                .iter()
                .zip(pot.log_ratios())
                .map(|(q, y)| y / q * q)
                .sum::<f64>()
                / pot.positions().iter().sum::<f64>();
            assert_relative_eq!(g, h.gamma, max_relative = 1e-13);
        }
    }

    #[test]
    fn objective_zero_on_exact_pareto_design() {
        // construct ratios lying exactly on the QQ line with slope 1/alpha
        let alpha = 2.0;
        let k = 40;
        let mut pot = PotView::from_ratios(vec![1.5; k], 100).unwrap();
        let ratios: Vec<f64> = pot
            .positions()
            .iter()
            .map(|q| (q / alpha).exp())
            .collect();
        pot = PotView::from_ratios(ratios, 100).unwrap();
        let obj = wls_objective(&pot, alpha, 0.0, 1.0, WeightScheme::Hill).unwrap();
        assert!(obj < 1e-24, "objective should vanish on exact design: {obj}");
    }

    #[test]
    fn single_term_sum_at_k_one() {
        let pot = PotView::from_ratios(vec![2.0], 10).unwrap();
        // k = 1: one residual, position E(1) = 1, Hill weight 1
        let obj = wls_objective(&pot, 1.0, 0.0, 1.0, WeightScheme::Hill).unwrap();
        let expect = (1.0 - 2.0_f64.ln()) * (1.0 - 2.0_f64.ln());
        assert_relative_eq!(obj, expect, max_relative = 1e-14);
    }

    #[test]
    fn fit_matches_brute_force_grid() {
        // oracle: dense 2D grid search over (1/alpha, delta)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let s = random_sample(&mut rng, 120);
        let pot = PotView::from_sample(&s, 60).unwrap();
        let tau = 1.3;
        let fit = fit_wls_fixed_tau(&pot, tau, WeightScheme::Hill).unwrap();

        let mut best = f64::INFINITY;
        let mut best_g = 0.0;
        let mut best_d = 0.0;
        for gi in 1..4000 {
            let g = gi as f64 * 1e-3;
            for di in 0..400 {
                let d = di as f64 * 1e-3;
                let obj = wls_objective(&pot, 1.0 / g, d, tau, WeightScheme::Hill).unwrap();
                if obj < best {
                    best = obj;
                    best_g = g;
                    best_d = d;
                }
            }
        }
        assert!(
            fit.objective <= best + 1e-12,
            "closed form {} must not exceed grid best {}",
            fit.objective,
            best
        );
        assert_relative_eq!(1.0 / fit.alpha, best_g, epsilon = 2e-3);
        assert!((fit.delta - best_d).abs() < 2e-3);
    }

    #[test]
    fn recovers_synthetic_linear_model() {
        // noise-free design points: log v = (1/alpha0) q - delta0 h_tau(v)
        // built by fixed-point iteration on v
        let alpha0 = 2.0;
        let delta0 = 0.3;
        let tau = 1.5;
        let k = 50;
        let template = PotView::from_ratios(vec![1.1; k], 200).unwrap();
        let qs: Vec<f64> = template.positions().to_vec();
        let ratios: Vec<f64> = qs
            .iter()
            .map(|q| {
                let mut v: f64 = (q / alpha0).exp();
                for _ in 0..200 {
                    let h = (v.powf(tau) - 1.0) / tau;
                    let next = ((q / alpha0) - delta0 * h).exp();
                    v = 0.5 * (v + next.max(1.0));
                }
                v.max(1.0)
            })
            .collect();
        let pot = PotView::from_ratios(ratios, 200).unwrap();
        let fit = fit_wls_fixed_tau(&pot, tau, WeightScheme::Hill).unwrap();
        assert_relative_eq!(fit.alpha, alpha0, max_relative = 1e-5);
        assert_relative_eq!(fit.delta, delta0, max_relative = 1e-4);
        assert!(fit.objective < 1e-12);
    }

    #[test]
    fn pareto_data_gives_near_zero_delta() {
        // strict Pareto(2) sample of 10^4 points: alpha ~ 2, delta ~ 0
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Sample::new(
            (0..10_000)
                .map(|_| (1.0 - rng.gen::<f64>()).powf(-1.0 / 2.0))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let pot = PotView::from_sample(&s, 6000).unwrap();
        let fit = fit_wls_fixed_tau(&pot, 1.0, WeightScheme::Hill).unwrap();
        assert!(
            (fit.alpha - 2.0).abs() < 0.1,
            "alpha should be near 2: {}",
            fit.alpha
        );
        assert!(fit.delta < 0.05, "delta should be near 0: {}", fit.delta);
    }

    #[test]
    fn minimal_k_is_well_posed() {
        let pot = PotView::from_ratios(vec![3.0, 2.0, 1.4], 10).unwrap();
        let fit = fit_wls_fixed_tau(&pot, 1.0, WeightScheme::Hill).unwrap();
        assert!(fit.alpha.is_finite() && fit.alpha > 0.0);
        assert!(fit.delta.is_finite() && fit.delta >= 0.0);
        assert!(fit.objective.is_finite());
        assert!(fit_wls_fixed_tau(
            &PotView::from_ratios(vec![2.0, 1.5], 10).unwrap(),
            1.0,
            WeightScheme::Hill
        )
        .is_err());
    }

    #[test]
    fn tied_ratios_are_degenerate() {
        let pot = PotView::from_ratios(vec![1.0, 1.0, 1.0, 1.0], 10).unwrap();
        let e = fit_wls_fixed_tau(&pot, 1.0, WeightScheme::Hill);
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }

    #[test]
    fn negative_delta_clamps_to_hill() {
        // anti-tempered data (ratios rising faster than Pareto): the
        // unconstrained delta would be negative, so the fit must return
        // delta = 0 and the Hill slope.
        let k = 30;
        let template = PotView::from_ratios(vec![1.1; k], 100).unwrap();
        let ratios: Vec<f64> = template
            .positions()
            .iter()
            .map(|q| (0.5 * q + 0.1 * q * q).exp())
            .collect();
        let pot = PotView::from_ratios(ratios, 100).unwrap();
        let fit = fit_wls_fixed_tau(&pot, 1.0, WeightScheme::Hill).unwrap();
        assert_eq!(fit.delta, 0.0);
        let h = pot.log_ratios().iter().sum::<f64>() / k as f64;
        assert_relative_eq!(1.0 / fit.alpha, h, max_relative = 1e-12);
    }
}
