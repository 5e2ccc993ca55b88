//! Base heavy-tailed families and tempered sampling.
//!
//! A tempered observation is `X = min(Y, W)` where `Y` follows one of the
//! base families below and `W` is Weibull with survival
//! `P(W > x) = exp(-(beta x)^tau)`, independent of `Y`. Both components
//! are drawn by inverting their survival functions, so sampling is exact
//! and fully determined by the seed.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::sample::Sample;

/// Base distribution of the untempered component `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaseFamily {
    /// Burr with survival `(1 + y^(-xi * alpha))^(1/xi)`, `y > 0`, `xi < 0`.
    Burr { alpha: f64, xi: f64 },
    /// Fréchet with distribution function `exp(-y^(-alpha))`, `y > 0`.
    Frechet { alpha: f64 },
    /// Strict Pareto with survival `y^(-alpha)`, `y > 1`.
    Pareto { alpha: f64 },
    /// Log-normal: `log Y ~ N(mu, sigma^2)`.
    LogNormal { mu: f64, sigma: f64 },
}

impl BaseFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseFamily::Burr { alpha, xi } => {
                if !(alpha > 0.0 && alpha.is_finite()) || !(xi < 0.0 && xi.is_finite()) {
                    return Err(Error::domain(format!(
                        "Burr requires alpha > 0 and xi < 0, got ({alpha}, {xi})"
                    )));
                }
            }
            BaseFamily::Frechet { alpha } | BaseFamily::Pareto { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::domain(format!("alpha must be positive: {alpha}")));
                }
            }
            BaseFamily::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::domain(format!(
                        "log-normal requires finite mu and sigma > 0, got ({mu}, {sigma})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Survival function `P(Y > y)` for `y > 0`.
    pub fn survival(&self, y: f64) -> f64 {
        match *self {
            BaseFamily::Burr { alpha, xi } => (1.0 + y.powf(-xi * alpha)).powf(1.0 / xi),
            BaseFamily::Frechet { alpha } => -(-y.powf(-alpha)).exp_m1(),
            BaseFamily::Pareto { alpha } => {
                if y <= 1.0 {
                    1.0
                } else {
                    y.powf(-alpha)
                }
            }
            BaseFamily::LogNormal { mu, sigma } => {
                let z = (y.ln() - mu) / sigma;
                Normal::standard().sf(z)
            }
        }
    }

    /// Inverse survival: the `y` with `P(Y > y) = s`, for `s in (0, 1]`.
    pub fn inverse_survival(&self, s: f64) -> f64 {
        match *self {
            BaseFamily::Burr { alpha, xi } => (s.powf(xi) - 1.0).powf(-1.0 / (xi * alpha)),
            BaseFamily::Frechet { alpha } => {
                if s == 1.0 {
                    0.0
                } else {
                    (-(1.0 - s).ln()).powf(-1.0 / alpha)
                }
            }
            BaseFamily::Pareto { alpha } => s.powf(-1.0 / alpha),
            BaseFamily::LogNormal { mu, sigma } => {
                (mu + sigma * Normal::standard().inverse_cdf(1.0 - s)).exp()
            }
        }
    }

    /// Tail index of the power-law part; `None` for the log-normal,
    /// which sits outside the Pareto-type class.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            BaseFamily::Burr { alpha, .. }
            | BaseFamily::Frechet { alpha }
            | BaseFamily::Pareto { alpha } => Some(alpha),
            BaseFamily::LogNormal { .. } => None,
        }
    }

    /// Second-order slow-variation constants `(D, rho)` where known:
    /// Burr gives `(alpha, xi * alpha)`, Fréchet `(alpha/2, -alpha)` and
    /// the strict Pareto `(0, -1)` (its slowly varying part is constant).
    pub fn second_order(&self) -> Option<(f64, f64)> {
        match *self {
            BaseFamily::Burr { alpha, xi } => Some((alpha, xi * alpha)),
            BaseFamily::Frechet { alpha } => Some((0.5 * alpha, -alpha)),
            BaseFamily::Pareto { .. } => Some((0.0, -1.0)),
            BaseFamily::LogNormal { .. } => None,
        }
    }
}

/// Specification for drawing a tempered sample `X = min(Y, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperedSampleSpec {
    pub base: BaseFamily,
    /// Weibull shape of the tempering component.
    pub tau: f64,
    /// Weibull scale of the tempering component.
    pub beta: f64,
    pub n: usize,
    pub seed: u64,
}

impl TemperedSampleSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive: {}", self.tau)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::domain(format!(
                "beta must be positive: {}",
                self.beta
            )));
        }
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        Ok(())
    }

    /// Survival of the tempering component, `P(W > x) = exp(-(beta x)^tau)`.
    pub fn weibull_survival(&self, x: f64) -> f64 {
        (-(self.beta * x).powf(self.tau)).exp()
    }

    fn weibull_inverse_survival(&self, s: f64) -> f64 {
        (-s.ln()).powf(1.0 / self.tau) / self.beta
    }

    /// Survival of `X = min(Y, W)`: the product of component survivals.
    pub fn survival(&self, x: f64) -> f64 {
        self.base.survival(x) * self.weibull_survival(x)
    }
}

/// Draw `spec.n` independent tempered observations and sort them.
pub fn sample_tempered(spec: &TemperedSampleSpec) -> Result<Sample> {
    sample_tempered_stream(spec, 0)
}

/// As [`sample_tempered`], on RNG stream `stream` of `spec.seed`.
/// Distinct streams are independent; the same (seed, stream) pair always
/// reproduces the same sample.
pub fn sample_tempered_stream(spec: &TemperedSampleSpec, stream: u64) -> Result<Sample> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, stream);
    let mut values = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        // uniforms on (0, 1]: survival inversion maps 1 to the lower endpoint
        let u_y = 1.0 - rng.gen::<f64>();
        let u_w = 1.0 - rng.gen::<f64>();
        let y = spec.base.inverse_survival(u_y);
        let w = spec.weibull_inverse_survival(u_w);
        values.push(y.min(w));
    }
    Sample::new(values)
}
