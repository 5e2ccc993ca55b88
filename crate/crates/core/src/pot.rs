//! Peaks-over-threshold views and the Hill estimator.
//!
//! For a chosen rank `k` the threshold is the `(k+1)`-largest order
//! statistic `x(n-k)` and the POT data are the relative excess ratios
//! `v(j) = x(n-j+1) / x(n-k)`, `j = 1..k`, stored in descending order
//! (`v(1)` is the sample maximum over the threshold). All estimators in
//! this crate are functions of these ratios and of ranks only, which is
//! what makes them invariant under rescaling of the data.
//!
//! QQ abscissas for the ratios are the expected exponential order
//! statistics `E(i) = 1/i + 1/(i+1) + ... + 1/k` for the `i`-th largest
//! ratio. They sum to exactly `k`, which is what makes the weighted
//! least-squares fit with weights `1/E(i)` reproduce the Hill estimator
//! exactly when the tempering term is switched off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// The POT ratios at rank `k`, with cached logs and QQ positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotView {
    k: usize,
    n: usize,
    threshold: f64,
    /// Excess ratios, non-increasing; `v[0]` is the largest.
    v: Vec<f64>,
    log_v: Vec<f64>,
    positions: Vec<f64>,
}

impl PotView {
    /// Ratios over the threshold `x(n-k)` for `1 <= k <= n-1`.
    pub fn from_sample(s: &Sample, k: usize) -> Result<Self> {
        let n = s.n();
        if k < 1 || k > n - 1 {
            return Err(Error::domain(format!(
                "k must satisfy 1 <= k <= n-1, got k={k}, n={n}"
            )));
        }
        let threshold = s.order(n - k);
        let v: Vec<f64> = (1..=k).map(|j| s.order(n - j + 1) / threshold).collect();
        Ok(Self::from_parts(v, n, threshold))
    }

    /// Build a view directly from excess ratios (all `>= 1`), e.g. for
    /// synthetic data drawn from the limit model. Ratios are sorted
    /// descending; the threshold is reported as 1.
    pub fn from_ratios(mut v: Vec<f64>, n: usize) -> Result<Self> {
        if v.is_empty() || n < v.len() + 1 {
            return Err(Error::domain("need at least one ratio and n >= k+1"));
        }
        if v.iter().any(|x| !x.is_finite() || *x < 1.0) {
            return Err(Error::domain("excess ratios must be finite and >= 1"));
        }
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self::from_parts(v, n, 1.0))
    }

    fn from_parts(v: Vec<f64>, n: usize, threshold: f64) -> Self {
        let k = v.len();
        let log_v: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        // positions[i] = sum_{m=i+1}^{k} 1/m, accumulated from the tail
        let mut positions = vec![0.0; k];
        let mut acc = 0.0;
        for i in (0..k).rev() {
            acc += 1.0 / (i + 1) as f64;
            positions[i] = acc;
        }
        Self {
            k,
            n,
            threshold,
            v,
            log_v,
            positions,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Size of the originating sample.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Ratios in descending order.
    pub fn ratios(&self) -> &[f64] {
        &self.v
    }

    pub(crate) fn log_ratios(&self) -> &[f64] {
        &self.log_v
    }

    /// QQ abscissa of the `i`-th largest ratio (0-based), `E(i+1)`.
    pub(crate) fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `v(i)^tau` for every ratio, written into `out`.
    pub(crate) fn powers_into(&self, tau: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.log_v.iter().map(|ly| (tau * ly).exp()));
    }
}

/// Hill estimate at rank `k`: `gamma` is the mean log excess ratio and
/// `alpha` its reciprocal, absent when all top ratios are tied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub gamma: f64,
    pub alpha: Option<f64>,
}

/// The Hill estimator `H = (1/k) sum log v(j)` for `1 <= k <= n-1`.
pub fn hill(s: &Sample, k: usize) -> Result<HillEstimate> {
    let pot = PotView::from_sample(s, k)?;
    Ok(hill_from_pot(&pot))
}

pub(crate) fn hill_from_pot(pot: &PotView) -> HillEstimate {
    let gamma = pot.log_ratios().iter().sum::<f64>() / pot.k() as f64;
    let alpha = if gamma > 0.0 { Some(1.0 / gamma) } else { None };
    HillEstimate { gamma, alpha }
}
