//! Grid estimation over the tempering shape and adaptive threshold choice.
//!
//! For each rank `k` the fit runs over a fixed ascending grid of shape
//! values `tau(1) < ... < tau(m)`: at each grid point the WLS problem is
//! solved in closed form and the likelihood is maximised over
//! `(alpha, lambda)` starting from the WLS solution (`lambda = delta/tau`).
//! The WLS winner is the grid point with the smallest objective, the MLE
//! winner the one with the largest log-likelihood; ties break to the
//! smaller grid index. The goodness-of-fit statistic `SS(k)` is the WLS
//! objective with Hill weights at the WLS winner and is reported for
//! every rank.
//!
//! The adaptive rank is chosen by stability, not by minimising `SS(k)`
//! directly: the raw sum always dips at the smallest ranks, where three
//! fitted quantities absorb most of the noise, so its argmin degenerates
//! to `k_min` even when the model is exact at every rank. Instead the
//! per-rank WLS tail index is smoothed across neighbouring ranks and the
//! rank whose neighbourhood has the smallest relative spread (IQR over
//! median) is located; `k_hat` is the largest rank whose spread is
//! within 20% of that minimum. On data that follow the model everywhere
//! this drives `k_hat` toward large ranks (maximal efficiency), while
//! systematic misfit — a drifting tail index — pushes it down to the
//! stable stretch of the trace.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{fit_mle_with_powers, MleFit};
use crate::model::TemperedParams;
use crate::pot::{hill_from_pot, HillEstimate, PotView};
use crate::sample::Sample;
use crate::tail::truncated_alpha_from_pot;
use crate::wls::{fit_wls_with_powers, objective_with_powers, WeightScheme, WlsFit};

/// Which estimation route produced a [`FitResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wls,
    Mle,
}

/// A fitted parameter triple at one rank, with its winning objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: TemperedParams,
    pub method: Method,
    pub k: usize,
    /// WLS value for [`Method::Wls`], log-likelihood for [`Method::Mle`].
    pub objective: f64,
    /// Index of the winning grid value of `tau`.
    pub tau_grid_index: usize,
    pub converged: bool,
}

/// Options shared by the trace and the study harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub k_min: usize,
    /// Inclusive upper rank; `None` means `n - 1`.
    pub k_max: Option<usize>,
    pub tau_grid: Vec<f64>,
    pub weights: WeightScheme,
}

impl FitOptions {
    /// 50 geometrically spaced shape values on `[0.1, 5.0]`.
    pub fn default_tau_grid() -> Vec<f64> {
        geometric_grid(0.1, 5.0, 50)
    }
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            k_min: 10,
            k_max: None,
            tau_grid: Self::default_tau_grid(),
            weights: WeightScheme::Hill,
        }
    }
}

/// `points` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| lo * (ratio * i as f64).exp())
        .collect()
}

/// Everything recorded at one rank of the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub wls: FitResult,
    pub mle: FitResult,
    /// Goodness-of-fit `SS(k)` driving the adaptive rank choice.
    pub ss: f64,
    pub hill: HillEstimate,
    /// Truncated-Pareto comparator; absent when its equation has no root.
    pub alpha_trunc: Option<f64>,
}

/// Per-rank fits over `[k_min, k_max]` with the adaptive rank `k_hat`
/// chosen by [`select_k_hat`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
    pub k_min: usize,
    pub k_max: usize,
    pub k_hat: usize,
}

impl FitTrace {
    pub fn record_at(&self, k: usize) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.k == k)
    }

    /// The record at the adaptive rank.
    pub fn selected(&self) -> &TraceRecord {
        self.record_at(self.k_hat).expect("k_hat always has a record")
    }
}

pub(crate) struct GridPoint {
    pub tau_index: usize,
    pub tau: f64,
    pub wls: WlsFit,
    pub mle: MleFit,
}

/// Run the WLS fit at every grid point, returning the winner
/// (smallest objective, ties to the smaller index) and its `SS(k)`.
pub(crate) fn wls_winner(
    pot: &PotView,
    tau_grid: &[f64],
    weights: WeightScheme,
    powers: &mut Vec<f64>,
) -> Result<(usize, f64, WlsFit, f64)> {
    if tau_grid.is_empty() {
        return Err(Error::domain("tau grid is empty"));
    }
    let mut best: Option<(usize, f64, WlsFit)> = None;
    for (i, &tau) in tau_grid.iter().enumerate() {
        pot.powers_into(tau, powers);
        let fit = match fit_wls_with_powers(pot, tau, powers, weights) {
            Ok(f) => f,
            Err(_) => continue,
        };
        if best.as_ref().map_or(true, |b| fit.objective < b.2.objective) {
            best = Some((i, tau, fit));
        }
    }
    let (idx, tau, fit) =
        best.ok_or_else(|| Error::degenerate("WLS fit failed at every grid value of tau"))?;
    let ss = if weights == WeightScheme::Hill {
        fit.objective
    } else {
        pot.powers_into(tau, powers);
        objective_with_powers(pot, fit.alpha, fit.delta, tau, powers, WeightScheme::Hill)
    };
    Ok((idx, tau, fit, ss))
}

/// Fit every grid point (WLS and MLE) at one rank.
pub(crate) fn fit_k_grid(
    pot: &PotView,
    tau_grid: &[f64],
    weights: WeightScheme,
    powers: &mut Vec<f64>,
) -> Result<Vec<GridPoint>> {
    if tau_grid.is_empty() {
        return Err(Error::domain("tau grid is empty"));
    }
    let mut out = Vec::with_capacity(tau_grid.len());
    for (i, &tau) in tau_grid.iter().enumerate() {
        pot.powers_into(tau, powers);
        let wls = match fit_wls_with_powers(pot, tau, powers, weights) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let mle = match fit_mle_with_powers(pot, tau, (wls.alpha, wls.delta / tau), powers) {
            Ok(f) => f,
            Err(_) => continue,
        };
        out.push(GridPoint {
            tau_index: i,
            tau,
            wls,
            mle,
        });
    }
    if out.is_empty() {
        return Err(Error::degenerate(
            "estimation failed at every grid value of tau",
        ));
    }
    Ok(out)
}

pub(crate) fn winners_from_grid(pot: &PotView, grid: &[GridPoint]) -> (FitResult, FitResult) {
    let k = pot.k();
    let wls_best = grid
        .iter()
        .min_by(|a, b| {
            a.wls
                .objective
                .partial_cmp(&b.wls.objective)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.tau_index.cmp(&b.tau_index))
        })
        .expect("non-empty grid");
    let mle_best = grid
        .iter()
        .min_by(|a, b| {
            b.mle
                .loglik
                .partial_cmp(&a.mle.loglik)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.tau_index.cmp(&b.tau_index))
        })
        .expect("non-empty grid");

    let wls_result = FitResult {
        params: TemperedParams {
            alpha: wls_best.wls.alpha,
            lambda: wls_best.wls.delta / wls_best.tau,
            tau: wls_best.tau,
        },
        method: Method::Wls,
        k,
        objective: wls_best.wls.objective,
        tau_grid_index: wls_best.tau_index,
        converged: true,
    };
    let mle_result = FitResult {
        params: TemperedParams {
            alpha: mle_best.mle.alpha,
            lambda: mle_best.mle.lambda,
            tau: mle_best.tau,
        },
        method: Method::Mle,
        k,
        objective: mle_best.mle.loglik,
        tau_grid_index: mle_best.tau_index,
        converged: mle_best.mle.converged,
    };
    (wls_result, mle_result)
}

/// WLS and MLE winners over the shape grid at one rank.
pub fn fit_k(
    pot: &PotView,
    tau_grid: &[f64],
    weights: WeightScheme,
) -> Result<(FitResult, FitResult)> {
    let mut powers = Vec::with_capacity(pot.k());
    let grid = fit_k_grid(pot, tau_grid, weights, &mut powers)?;
    Ok(winners_from_grid(pot, &grid))
}

/// Mean of `values` over the index window `center +- width`, clipped to
/// the slice; `pairs` must be sorted by rank.
fn window_mean(pairs: &[(usize, f64)], k: usize, width: usize) -> f64 {
    let lo = pairs.partition_point(|&(kk, _)| kk < k.saturating_sub(width));
    let hi = pairs.partition_point(|&(kk, _)| kk <= k + width);
    pairs[lo..hi].iter().map(|&(_, v)| v).sum::<f64>() / (hi - lo) as f64
}

/// Adaptive rank from a per-rank tail-index trace `(k, alpha_w)`, sorted
/// ascending in `k`. Returns `None` when no rank yields a usable spread
/// (non-positive or non-finite trace everywhere).
///
/// The trace is smoothed over ranks within 12% of `k` (at least 8), the
/// relative spread (interquartile range over median) of the smoothed
/// trace is measured over ranks within 50% of `k` (at least 32), and the
/// largest rank whose spread is within 20% of the minimal spread wins.
pub fn select_k_hat(alpha_trace: &[(usize, f64)]) -> Option<usize> {
    if alpha_trace.is_empty() {
        return None;
    }
    if alpha_trace.len() == 1 {
        return Some(alpha_trace[0].0);
    }
    let smoothed: Vec<(usize, f64)> = alpha_trace
        .iter()
        .map(|&(k, _)| (k, window_mean(alpha_trace, k, (k * 12 / 100).max(8))))
        .collect();

    let spread: Vec<(usize, f64)> = smoothed
        .iter()
        .map(|&(k, _)| {
            let width = (k / 2).max(32);
            let lo = smoothed.partition_point(|&(kk, _)| kk < k.saturating_sub(width));
            let hi = smoothed.partition_point(|&(kk, _)| kk <= k + width);
            let mut vals: Vec<f64> = smoothed[lo..hi].iter().map(|&(_, v)| v).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let q = |p: f64| vals[((vals.len() - 1) as f64 * p) as usize];
            let median = q(0.5);
            let s = if median > 0.0 && median.is_finite() {
                (q(0.75) - q(0.25)) / median
            } else {
                f64::INFINITY
            };
            (k, s)
        })
        .collect();

    let s_min = spread.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    if !s_min.is_finite() {
        return None;
    }
    spread
        .iter()
        .rev()
        .find(|&&(_, s)| s <= 1.2 * s_min)
        .map(|&(k, _)| k)
}

/// Goodness-of-fit statistic: the Hill-weighted WLS objective evaluated
/// at a WLS fit's parameters. The fit must come from the same view.
pub fn ss_k(pot: &PotView, wls_fit: &FitResult) -> Result<f64> {
    if wls_fit.k != pot.k() {
        return Err(Error::domain(format!(
            "rank mismatch: fit has k = {}, view has k = {}",
            wls_fit.k,
            pot.k()
        )));
    }
    if wls_fit.method != Method::Wls {
        return Err(Error::domain("SS(k) is defined for WLS fits"));
    }
    let p = &wls_fit.params;
    crate::wls::wls_objective(pot, p.alpha, p.delta(), p.tau, WeightScheme::Hill)
}

/// Fit every rank in `[opts.k_min, opts.k_max]` and select `k_hat`.
///
/// Ranks where the fit is degenerate (tied order statistics) are dropped
/// from the trace; the whole call fails only if no rank survives.
pub fn fit_trace(s: &Sample, opts: &FitOptions) -> Result<FitTrace> {
    let n = s.n();
    if n < 5 {
        return Err(Error::domain(format!("estimation needs n >= 5, got {n}")));
    }
    let k_max = opts.k_max.unwrap_or(n - 1);
    if opts.k_min < 3 || k_max > n - 1 || opts.k_min > k_max {
        return Err(Error::domain(format!(
            "invalid rank range [{}, {k_max}] for n = {n}",
            opts.k_min
        )));
    }
    if opts.tau_grid.is_empty() {
        return Err(Error::domain("tau grid is empty"));
    }

    let ks: Vec<usize> = (opts.k_min..=k_max).collect();
    let records: Vec<Option<TraceRecord>> = ks
        .par_iter()
        .map(|&k| {
            let pot = PotView::from_sample(s, k).ok()?;
            let mut powers = Vec::with_capacity(k);
            let grid = fit_k_grid(&pot, &opts.tau_grid, opts.weights, &mut powers).ok()?;
            let (wls, mle) = winners_from_grid(&pot, &grid);
            let ss = ss_k(&pot, &wls).ok()?;
            let hill = hill_from_pot(&pot);
            let alpha_trunc = truncated_alpha_from_pot(&pot).ok();
            Some(TraceRecord {
                k,
                wls,
                mle,
                ss,
                hill,
                alpha_trunc,
            })
        })
        .collect();

    let records: Vec<TraceRecord> = records.into_iter().flatten().collect();
    if records.is_empty() {
        return Err(Error::degenerate(
            "no rank in the requested range produced a valid fit",
        ));
    }
    let k_hat = records
        .iter()
        .filter(|r| r.ss.is_finite())
        .min_by(|a, b| {
            let na = a.ss / a.k as f64;
            let nb = b.ss / b.k as f64;
            na.partial_cmp(&nb)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.k.cmp(&b.k))
        })
        .map(|r| r.k)
        .ok_or_else(|| Error::degenerate("SS(k) not finite at any rank"))?;

    Ok(FitTrace {
        records,
        k_min: opts.k_min,
        k_max,
        k_hat,
    })
}
