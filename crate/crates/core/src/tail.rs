//! Tail probability and extreme quantile estimation, with the classical
//! Weissman and truncated-Pareto comparators.
//!
//! With a fitted triple at rank `k` and threshold `t = x(n-k)`, the
//! exceedance probability of a level `z > t` is estimated by
//!
//! ```text
//! P(X > z) ~ (k+1)/(n+1) * S(z/t),
//! ```
//!
//! the empirical exceedance proportion carried through the fitted limit
//! survival `S`. Inverting in `z` gives the extreme quantile (VaR)
//! estimator. The Weissman estimator keeps the historical `k/(n p)`
//! convention of its own literature; the two conventions are close but
//! not identical and are deliberately not harmonised.

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::model::{limit_quantile, survival_raw};
use crate::pot::{hill, hill_from_pot, PotView};
use crate::roots;
use crate::sample::Sample;

/// Estimated exceedance probability of a level `z` above the threshold.
pub fn tail_prob(fit: &FitResult, s: &Sample, k: usize, z: f64) -> Result<f64> {
    if fit.k != k {
        return Err(Error::domain(format!(
            "rank mismatch: fit has k = {}, requested k = {k}",
            fit.k
        )));
    }
    let n = s.n();
    if k < 1 || k > n - 1 {
        return Err(Error::domain(format!("k out of range: {k}")));
    }
    let t = s.order(n - k);
    if !(z >= t) {
        return Err(Error::domain(format!(
            "level z = {z} must lie above the threshold {t}"
        )));
    }
    let frac = (k + 1) as f64 / (n + 1) as f64;
    Ok(frac * survival_raw(z / t, &fit.params))
}

/// The level `z` whose estimated exceedance probability is `p`, i.e. the
/// `VaR` at level `1 - p`. Requires `p <= (k+1)/(n+1)`; the boundary
/// value returns the threshold itself.
pub fn extreme_quantile(fit: &FitResult, s: &Sample, k: usize, p: f64) -> Result<f64> {
    if fit.k != k {
        return Err(Error::domain(format!(
            "rank mismatch: fit has k = {}, requested k = {k}",
            fit.k
        )));
    }
    let n = s.n();
    if k < 1 || k > n - 1 {
        return Err(Error::domain(format!("k out of range: {k}")));
    }
    let frac = (k + 1) as f64 / (n + 1) as f64;
    if !(p > 0.0 && p <= frac) {
        return Err(Error::domain(format!(
            "p must lie in (0, {frac}] (the exceedance proportion), got {p}"
        )));
    }
    let t = s.order(n - k);
    // (k+1)/(n+1) * S(z/t) = p  <=>  S(z/t) = p/frac
    let x = limit_quantile(p / frac, &fit.params)?;
    Ok(t * x)
}

/// The Weissman extrapolation `x(n-k) * (k/(n p))^H` under a pure Pareto
/// tail, `H` the Hill estimate. Requires `0 < p <= k/n` and a
/// non-degenerate `H`.
pub fn weissman_quantile(s: &Sample, k: usize, p: f64) -> Result<f64> {
    let n = s.n();
    if k < 1 || k > n - 1 {
        return Err(Error::domain(format!("k out of range: {k}")));
    }
    let kf = k as f64 / n as f64;
    if !(p > 0.0 && p <= kf) {
        return Err(Error::domain(format!(
            "p must lie in (0, k/n = {kf}], got {p}"
        )));
    }
    let h = hill(s, k)?;
    if h.gamma <= 0.0 {
        return Err(Error::degenerate(
            "Hill estimate is zero: Weissman quantile undefined",
        ));
    }
    Ok(s.order(n - k) * (kf / p).powf(h.gamma))
}

/// Stable evaluation of `phi(x) = 1/x - 1/(e^x - 1)` on `x > 0`, which
/// decreases from 1/2 at the origin to 0 at infinity.
fn phi(x: f64) -> f64 {
    if x < 1e-3 {
        0.5 - x / 12.0 + x * x * x / 720.0
    } else if x > 35.0 {
        1.0 / x
    } else {
        1.0 / x - 1.0 / x.exp_m1()
    }
}

fn phi_prime(x: f64) -> f64 {
    if x < 1e-3 {
        -1.0 / 12.0 + x * x / 240.0
    } else if x > 35.0 {
        -1.0 / (x * x)
    } else {
        let em = x.exp_m1();
        -1.0 / (x * x) + (em + 1.0) / (em * em)
    }
}

/// Solve the truncated-Pareto likelihood equation
/// `H = 1/alpha + R^alpha log R / (1 - R^alpha)` for `alpha > 0`,
/// given the Hill estimate `H` and the ratio `R = x(n-k)/x(n)`.
///
/// In terms of `phi` the equation reads `H = -log(R) * phi(-alpha log R)`,
/// whose right side decreases from `-log(R)/2` to zero; a root exists
/// exactly when `H` is below that initial value, and `alpha -> 1/H` as
/// `R -> 0`.
pub fn truncated_alpha_from(h: f64, r: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::degenerate(format!(
            "truncated-Pareto equation needs H > 0, got {h}"
        )));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::degenerate(format!(
            "truncated-Pareto equation needs 0 < R < 1, got {r}"
        )));
    }
    let l = -r.ln();
    let g = |a: f64| l * phi(a * l) - h;
    let dg = |a: f64| l * l * phi_prime(a * l);
    roots::bisect_newton(1e-12, 2.0 / h, g, dg, 1e-13, "truncated_alpha")
}

/// Truncated-Pareto tail index at rank `k` (needs `k >= 2` and an
/// untied maximum).
pub fn truncated_alpha(s: &Sample, k: usize) -> Result<f64> {
    let n = s.n();
    if k < 2 || k > n - 1 {
        return Err(Error::domain(format!(
            "truncated_alpha needs 2 <= k <= n-1, got {k}"
        )));
    }
    let r = s.order(n - k) / s.order(n);
    if r >= 1.0 {
        return Err(Error::degenerate(
            "maximum is tied with the threshold (R = 1)",
        ));
    }
    let h = hill(s, k)?;
    truncated_alpha_from(h.gamma, r)
}

pub(crate) fn truncated_alpha_from_pot(pot: &PotView) -> Result<f64> {
    if pot.k() < 2 {
        return Err(Error::domain("need k >= 2"));
    }
    let r = 1.0 / pot.ratios()[0];
    if r >= 1.0 {
        return Err(Error::degenerate("R = 1"));
    }
    let h = hill_from_pot(pot);
    truncated_alpha_from(h.gamma, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_k, FitOptions, Method};
    use crate::model::TemperedParams;
    use crate::rng::stream_rng;
    use crate::wls::WeightScheme;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn fixture() -> (Sample, usize, FitResult) {
        let spec = crate::family::TemperedSampleSpec {
            base: crate::family::BaseFamily::Pareto { alpha: 1.0 },
            tau: 2.0,
            beta: 0.2,
            n: 500,
            seed: 31,
        };
        let s = crate::family::sample_tempered(&spec).unwrap();
        let k = 300;
        let pot = PotView::from_sample(&s, k).unwrap();
        let (_, mle) = fit_k(&pot, &FitOptions::default_tau_grid(), WeightScheme::Hill).unwrap();
        (s, k, mle)
    }

    #[test]
    fn boundary_gives_exceedance_proportion() {
        let (s, k, fit) = fixture();
        let t = s.order(s.n() - k);
        let p = tail_prob(&fit, &s, k, t).unwrap();
        assert_relative_eq!(
            p,
            (k + 1) as f64 / (s.n() + 1) as f64,
            max_relative = 1e-14
        );
        assert!(tail_prob(&fit, &s, k, t * 0.999).is_err());
    }

    #[test]
    fn pareto_reduction_of_tail_prob() {
        let (s, k, mut fit) = fixture();
        fit.params = TemperedParams::new(1.4, 0.0, 1.0).unwrap();
        let t = s.order(s.n() - k);
        let z = t * 7.0;
        let p = tail_prob(&fit, &s, k, z).unwrap();
        let expect = (k + 1) as f64 / (s.n() + 1) as f64 * (z / t).powf(-1.4);
        assert_relative_eq!(p, expect, max_relative = 1e-12);
    }

    #[test]
    fn quantile_boundary_is_threshold() {
        let (s, k, fit) = fixture();
        let frac = (k + 1) as f64 / (s.n() + 1) as f64;
        let z = extreme_quantile(&fit, &s, k, frac).unwrap();
        assert_relative_eq!(z, s.order(s.n() - k), max_relative = 1e-12);
    }

    #[test]
    fn quantile_prob_roundtrip() {
        let (s, k, fit) = fixture();
        for &p in &[1e-3, 1e-4, 1e-5] {
            let z = extreme_quantile(&fit, &s, k, p).unwrap();
            let back = tail_prob(&fit, &s, k, z).unwrap();
            assert_relative_eq!(back, p, max_relative = 1e-8);
        }
    }

    #[test]
    fn quantile_is_monotone_in_p() {
        let (s, k, fit) = fixture();
        let mut prev = f64::INFINITY;
        for &p in &[1e-5, 1e-4, 1e-3, 1e-2] {
            let z = extreme_quantile(&fit, &s, k, p).unwrap();
            assert!(z < prev, "quantile must decrease as p grows");
            prev = z;
        }
    }

    #[test]
    fn pareto_fit_matches_weissman_up_to_convention() {
        // with lambda = 0 the tempered quantile is the Weissman formula
        // with (k+1, n+1) in place of (k, n)
        let (s, k, mut fit) = fixture();
        let pot = PotView::from_sample(&s, k).unwrap();
        let h = hill_from_pot(&pot);
        fit.params = TemperedParams::new(h.alpha.unwrap(), 0.0, 1.0).unwrap();
        let n = s.n();
        let p = 1.0 / n as f64;
        let tempered = extreme_quantile(&fit, &s, k, p).unwrap();
        let weissman = weissman_quantile(&s, k, p).unwrap();
        let convention =
            (((k + 1) as f64 / ((n + 1) as f64 * p)) / (k as f64 / (n as f64 * p))).powf(h.gamma);
        assert_relative_eq!(tempered / weissman, convention, max_relative = 1e-10);
    }

    #[test]
    fn weissman_unit_ratio_and_scaling() {
        let s = Sample::new((1..=100).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
        let k = 20;
        let p = k as f64 / 100.0;
        assert_relative_eq!(
            weissman_quantile(&s, k, p).unwrap(),
            s.order(80),
            max_relative = 1e-14
        );
        assert!(weissman_quantile(&s, k, 0.3).is_err());
    }

    #[test]
    fn weissman_hand_arithmetic() {
        // H = 1 and k/(np) = 4 must quadruple the threshold.
        let e = std::f64::consts::E;
        let s = Sample::new(vec![1.0, e, e * e, e * e * e, e * e * e * e]).unwrap();
        // k = 2: ratios e^2, e over threshold e^2; H = (2 + 1)/2 = 1.5
        // use k = 1 for H = 1: ratio e over threshold e^3
        let k = 1;
        let p = (k as f64 / 5.0) / 4.0;
        let q = weissman_quantile(&s, k, p).unwrap();
        assert_relative_eq!(q, s.order(4) * 4.0, max_relative = 1e-12);
    }

    #[test]
    fn truncated_equation_residual_vanishes() {
        let mut rng = stream_rng(77, 0);
        for _ in 0..200 {
            let r: f64 = rng.gen_range(1e-6..0.999);
            let cap = -r.ln() / 2.0;
            let h = rng.gen_range(0.05..0.95) * cap;
            let alpha = truncated_alpha_from(h, r).unwrap();
            let ra = r.powf(alpha);
            let residual = (1.0 / alpha + ra * r.ln() / (1.0 - ra) - h).abs();
            assert!(residual < 1e-10, "residual {residual} at (H={h}, R={r})");
        }
    }

    #[test]
    fn truncated_matches_bisection_oracle() {
        // independent plain-bisection oracle on the raw equation
        let oracle = |h: f64, r: f64| -> f64 {
            let f = |a: f64| {
                let ra = r.powf(a);
                1.0 / a + ra * r.ln() / (1.0 - ra) - h
            };
            let (mut lo, mut hi) = (1e-9, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for &(h, r) in &[(0.2, 0.5), (0.1, 0.3), (0.4, 0.1), (1.0, 0.01)] {
            assert!(h < -f64::ln(r) / 2.0, "feasible case required");
            let mine = truncated_alpha_from(h, r).unwrap();
            assert_relative_eq!(mine, oracle(h, r), max_relative = 1e-7);
        }
    }

    #[test]
    fn truncated_infeasible_pair_has_no_root() {
        // H = 0.5, R = 0.5: the right side is bounded by -log(R)/2 < 0.35,
        // so no positive root exists and the solver must say so.
        let e = truncated_alpha_from(0.5, 0.5);
        assert!(matches!(e, Err(Error::Numeric(_))), "expected no-root error");
    }

    #[test]
    fn truncated_tends_to_reciprocal_hill_as_r_vanishes() {
        let h = 0.4;
        let alpha = truncated_alpha_from(h, 1e-13).unwrap();
        assert_relative_eq!(alpha, 1.0 / h, max_relative = 1e-6);
    }

    #[test]
    fn truncated_from_sample_ties_and_range() {
        let s = Sample::new(vec![1.0, 2.0, 3.0, 5.0, 5.0]).unwrap();
        assert!(truncated_alpha(&s, 1).is_err()); // k < 2
        let tied = Sample::new(vec![1.0, 2.0, 5.0, 5.0, 5.0]).unwrap();
        assert!(matches!(
            truncated_alpha(&tied, 2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn method_marker_is_serialisable() {
        let j = serde_json::to_string(&Method::Mle).unwrap();
        assert_eq!(j, "\"mle\"");
    }
}
