//! The tempered Pareto limit model for relative excesses.
//!
//! For `x >= 1` the survival function is
//!
//! ```text
//! S(x) = x^(-alpha) * exp(-lambda * (x^tau - 1))
//! ```
//!
//! with tail index `alpha > 0`, tempering intensity `lambda >= 0` and
//! tempering shape `tau > 0`. `lambda = 0` is the strict Pareto model.
//! The density follows by differentiation:
//!
//! ```text
//! f(x) = x^(-alpha-1) * exp(-lambda * (x^tau - 1)) * (alpha + lambda * tau * x^tau).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// The fitted or postulated parameter triple `(alpha, lambda, tau)`.
///
/// Derived quantities: `beta_inf = lambda^(1/tau)` (the tempering scale,
/// zero when `lambda` is zero), `delta = tau * lambda` (the slope of the
/// tempering term on QQ scale) and `gamma = 1/alpha` (the extreme value
/// index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperedParams {
    pub alpha: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl TemperedParams {
    pub fn new(alpha: f64, lambda: f64, tau: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive: {alpha}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!(
                "lambda must be non-negative: {lambda}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain(format!("tau must be positive: {tau}")));
        }
        Ok(Self { alpha, lambda, tau })
    }

    /// Tempering scale `beta_inf = lambda^(1/tau)`; zero when `lambda = 0`.
    pub fn beta_inf(&self) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda.powf(1.0 / self.tau)
        }
    }

    /// QQ-scale tempering slope `delta = tau * lambda`.
    pub fn delta(&self) -> f64 {
        self.tau * self.lambda
    }

    /// Extreme value index `gamma = 1/alpha`.
    pub fn gamma(&self) -> f64 {
        1.0 / self.alpha
    }
}

/// `h_tau(x) = (x^tau - 1) / tau`, the tempering ramp of the QQ fit.
///
/// Defined for `x > 0`; negative on `(0, 1)`, zero at `x = 1`. As
/// `tau -> 0` it tends to `log x`, but the limit is never substituted:
/// callers always pass `tau > 0`.
pub fn h_tau(x: f64, tau: f64) -> Result<f64> {
    if !x.is_finite() || !tau.is_finite() || x <= 0.0 || tau <= 0.0 {
        return Err(Error::domain(format!("h_tau: bad arguments x={x} tau={tau}")));
    }
    Ok(h_tau_raw(x, tau))
}

#[inline]
pub(crate) fn h_tau_raw(x: f64, tau: f64) -> f64 {
    (x.powf(tau) - 1.0) / tau
}

/// Survival function `S(x)` of the limit model, for `x >= 1`.
pub fn limit_survival(x: f64, p: &TemperedParams) -> Result<f64> {
    if !x.is_finite() || x < 1.0 {
        return Err(Error::domain(format!("limit_survival: x must be >= 1: {x}")));
    }
    Ok(survival_raw(x, p))
}

#[inline]
pub(crate) fn survival_raw(x: f64, p: &TemperedParams) -> f64 {
    (-p.alpha * x.ln() - p.lambda * (x.powf(p.tau) - 1.0)).exp()
}

/// Density `f(x)` of the limit model, for `x >= 1`.
pub fn limit_density(x: f64, p: &TemperedParams) -> Result<f64> {
    if !x.is_finite() || x < 1.0 {
        return Err(Error::domain(format!("limit_density: x must be >= 1: {x}")));
    }
    Ok(density_raw(x, p))
}

#[inline]
pub(crate) fn density_raw(x: f64, p: &TemperedParams) -> f64 {
    let xt = x.powf(p.tau);
    (-(p.alpha + 1.0) * x.ln() - p.lambda * (xt - 1.0)).exp() * (p.alpha + p.lambda * p.tau * xt)
}

/// Inverse survival: the `x >= 1` with `S(x) = q`, for `q in (0, 1]`.
///
/// Solved on log scale: `g(t) = -alpha t - lambda (e^(tau t) - 1) - log q`
/// is strictly decreasing in `t = log x`, so a geometrically grown bracket
/// plus Newton refinement converges to relative tolerance `1e-10` or better.
pub fn limit_quantile(q: f64, p: &TemperedParams) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!(
            "limit_quantile: q must lie in (0, 1]: {q}"
        )));
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let target = q.ln();
    let g = |t: f64| -p.alpha * t - p.lambda * ((p.tau * t).exp() - 1.0) - target;
    let dg = |t: f64| -p.alpha - p.lambda * p.tau * (p.tau * t).exp();

    // g(0) = -log q > 0; grow the upper end until g < 0.
    let t_hi = roots::grow_until(
        -target / p.alpha + 1.0,
        2.0,
        64,
        |t| g(t) < 0.0,
        "limit_quantile",
    )?;
    let t = roots::bisect_newton(0.0, t_hi, g, dg, 1e-13, "limit_quantile")?;
    Ok(t.exp())
}

/// Draw one observation from the limit law using two independent uniforms.
///
/// `S` factors as the product of a Pareto survival `x^(-alpha)` and the
/// conditional Weibull factor `exp(-lambda (x^tau - 1))`, each of which
/// inverts in closed form; the minimum of the two inversions has exactly
/// the survival `S`. With `lambda = 0` the second factor is infinite and
/// the draw collapses to the Pareto part.
#[inline]
pub(crate) fn draw_limit(u_pareto: f64, u_temper: f64, p: &TemperedParams) -> f64 {
    let x_pareto = u_pareto.powf(-1.0 / p.alpha);
    if p.lambda == 0.0 {
        return x_pareto;
    }
    let x_temper = (1.0 - u_temper.ln() / p.lambda).powf(1.0 / p.tau);
    x_pareto.min(x_temper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(alpha: f64, lambda: f64, tau: f64) -> TemperedParams {
        TemperedParams::new(alpha, lambda, tau).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(TemperedParams::new(0.0, 0.5, 1.0).is_err());
        assert!(TemperedParams::new(1.0, -0.1, 1.0).is_err());
        assert!(TemperedParams::new(1.0, 0.5, 0.0).is_err());
        assert!(TemperedParams::new(f64::NAN, 0.5, 1.0).is_err());
        assert!(TemperedParams::new(2.0, 0.0, 1.5).is_ok());
    }

    #[test]
    fn derived_quantities() {
        let q = p(2.0, 0.7, 1.3);
        assert_relative_eq!(q.beta_inf().powf(q.tau), q.lambda, max_relative = 1e-14);
        assert_eq!(q.delta(), 1.3 * 0.7);
        assert_eq!(q.gamma(), 0.5);
        assert_eq!(p(2.0, 0.0, 1.3).beta_inf(), 0.0);
    }

    #[test]
    fn h_tau_values() {
        assert_eq!(h_tau(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(h_tau(1.0, 2.7).unwrap(), 0.0);
        assert_eq!(h_tau(3.0, 2.0).unwrap(), 4.0);
        assert!(h_tau(f64::INFINITY, 1.0).is_err());
        assert!(h_tau(2.0, f64::NAN).is_err());
        // values in (0,1) are permitted and give negative output
        assert!(h_tau(0.5, 2.0).unwrap() < 0.0);
    }

    #[test]
    fn h_tau_is_continuous_in_tau_near_zero() {
        // (x^tau - 1)/tau -> log x; check closeness for small tau.
        let x = 3.0_f64;
        let v = h_tau(x, 1e-8).unwrap();
        assert_relative_eq!(v, x.ln(), max_relative = 1e-6);
    }

    #[test]
    fn survival_boundary_and_closed_form() {
        let q = p(1.0, 1.0, 1.0);
        assert_eq!(limit_survival(1.0, &q).unwrap(), 1.0);
        // 2^(-1) * e^(-1)
        assert_relative_eq!(
            limit_survival(2.0, &q).unwrap(),
            0.5 * (-1.0_f64).exp(),
            max_relative = 1e-14
        );
        assert!(limit_survival(0.99, &q).is_err());
    }

    #[test]
    fn survival_pareto_collapse() {
        let q = p(1.7, 0.0, 2.2);
        for &x in &[1.0, 1.5, 3.0, 10.0, 250.0] {
            assert_relative_eq!(
                limit_survival(x, &q).unwrap(),
                x.powf(-1.7),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn survival_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let q = p(
                rng.gen_range(0.3..4.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.2..3.0),
            );
            let mut prev = 1.0_f64;
            for i in 0..1000 {
                let x = 1.0 + (i as f64) * 0.05;
                let s = limit_survival(x, &q).unwrap();
                assert!((0.0..=1.0).contains(&s));
                assert!(s <= prev, "survival must be non-increasing");
                if i > 0 && prev > 1e-300 {
                    // strictly decreasing until it underflows
                    assert!(s < prev, "strictly decreasing on the grid");
                }
                prev = s;
            }
        }
    }

    #[test]
    fn density_boundary_and_pareto_collapse() {
        let q = p(1.3, 0.8, 1.9);
        assert_relative_eq!(
            limit_density(1.0, &q).unwrap(),
            1.3 + 0.8 * 1.9,
            max_relative = 1e-14
        );
        let pareto = p(2.4, 0.0, 1.0);
        for &x in &[1.0, 2.0, 7.0] {
            assert_relative_eq!(
                limit_density(x, &pareto).unwrap(),
                2.4 * x.powf(-3.4),
                max_relative = 1e-14
            );
        }
        assert!(limit_density(0.5, &q).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let q = p(2.0, 0.5, 1.5);
        let total = quad::integrate_upper(|u| density_raw(u, &q), 1e-9, "norm").unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn density_matches_negative_survival_derivative() {
        let q = p(2.0, 0.5, 1.5);
        for &x in &[1.2, 1.7, 2.5, 4.0, 8.0] {
            let h = 1e-6 * x;
            let num = -(limit_survival(x + h, &q).unwrap() - limit_survival(x - h, &q).unwrap())
                / (2.0 * h);
            assert_relative_eq!(limit_density(x, &q).unwrap(), num, max_relative = 1e-6);
        }
    }

    #[test]
    fn quantile_inverts_survival() {
        let q = p(2.0, 0.5, 1.5);
        assert_eq!(limit_quantile(1.0, &q).unwrap(), 1.0);
        let x = limit_quantile(0.01, &q).unwrap();
        assert_relative_eq!(limit_survival(x, &q).unwrap(), 0.01, max_relative = 1e-8);
        // identity over a range of x
        for &x in &[1.0, 1.3, 2.0, 10.0, 1000.0] {
            let s = limit_survival(x, &p(1.5, 0.2, 0.8)).unwrap();
            if s > 0.0 {
                let back = limit_quantile(s, &p(1.5, 0.2, 0.8)).unwrap();
                assert_relative_eq!(back, x, max_relative = 1e-8);
            }
        }
        assert!(limit_quantile(0.0, &q).is_err());
        assert!(limit_quantile(1.5, &q).is_err());
    }

    #[test]
    fn quantile_pareto_closed_form() {
        let q = p(2.5, 0.0, 1.0);
        for &u in &[0.9, 0.5, 0.1, 1e-4] {
            assert_relative_eq!(
                limit_quantile(u, &q).unwrap(),
                u.powf(-1.0 / 2.5),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn limit_draw_has_limit_distribution() {
        // KS test of 1e5 draws against the closed-form CDF.
        let q = p(2.0, 0.5, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| draw_limit(rng.gen::<f64>(), rng.gen::<f64>(), &q))
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0_f64;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = 1.0 - survival_raw(x, &q);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
        }
        // 1% critical value of the Kolmogorov statistic: 1.628 / sqrt(n)
        assert!(d < 1.628 / (n as f64).sqrt(), "KS distance too large: {d}");
    }

    proptest::proptest! {
        #[test]
        fn quantile_survival_roundtrip(
            alpha in 0.4f64..4.0,
            lambda in 0.0f64..2.0,
            tau in 0.25f64..2.5,
            q in 1e-6f64..1.0,
        ) {
            let pr = p(alpha, lambda, tau);
            let x = limit_quantile(q, &pr).unwrap();
            let s = limit_survival(x, &pr).unwrap();
            proptest::prop_assert!((s - q).abs() <= 1e-8 * q);
        }
    }
}
