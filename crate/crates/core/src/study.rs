//! Monte Carlo study harness: replicated sampling, per-rank mean/RMSE
//! curves and boxplot summaries at the adaptive rank.
//!
//! Each replication draws its sample from an independent RNG stream
//! derived from `(seed, replication index)`, runs the WLS goodness-of-fit
//! scan over the full selection range to locate `k_hat`, and evaluates
//! the requested estimators at every recorded rank. Replications are
//! independent tasks collected in replication order, so a study result
//! is bit-identical for a given config at any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{sample_tempered_stream, BaseFamily, TemperedSampleSpec};
use crate::fit::{fit_k_grid, winners_from_grid, FitOptions, FitResult};
use crate::pot::{hill_from_pot, PotView};
use crate::roots;
use crate::sample::Sample;
use crate::tail::{extreme_quantile, truncated_alpha_from_pot, weissman_quantile};
use crate::wls::WeightScheme;

/// Estimators a study can track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Wls,
    Mle,
    Hill,
    Weissman,
    TruncatedPareto,
}

pub const ALL_ESTIMATORS: [EstimatorKind; 5] = [
    EstimatorKind::Wls,
    EstimatorKind::Mle,
    EstimatorKind::Hill,
    EstimatorKind::Weissman,
    EstimatorKind::TruncatedPareto,
];

/// What a study cell measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Alpha,
    Tau,
    /// Extreme quantile at `p = 1/(c n)`.
    Quantile { c: f64 },
}

/// Study design: sampling family, replication count and evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub name: String,
    /// Sampling template; its `n` and `seed` fields are superseded by
    /// the study-level `n` and `seed` below.
    pub family: TemperedSampleSpec,
    pub n: usize,
    pub n_reps: usize,
    /// Ranks at which estimates are recorded (the adaptive rank is
    /// always recorded as well).
    pub k_grid: Vec<usize>,
    /// Selection range scanned for the adaptive rank.
    pub k_select_min: usize,
    /// `None` means `n - 1`.
    pub k_select_max: Option<usize>,
    pub tau_grid: Vec<f64>,
    /// Quantile factors `c`; each contributes `p = 1/(c n)`.
    pub quantile_p_factors: Vec<f64>,
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub weights: WeightScheme,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.base.validate()?;
        if self.n < 5 {
            return Err(Error::domain("study needs n >= 5"));
        }
        if self.n_reps < 1 {
            return Err(Error::domain("study needs at least one replication"));
        }
        if self.k_grid.is_empty() {
            return Err(Error::domain("k_grid is empty"));
        }
        let k_max = self.k_select_max.unwrap_or(self.n - 1);
        if self.k_select_min < 3 || k_max > self.n - 1 || self.k_select_min > k_max {
            return Err(Error::domain(format!(
                "invalid selection range [{}, {k_max}]",
                self.k_select_min
            )));
        }
        for &k in &self.k_grid {
            if k < 3 || k > self.n - 1 {
                return Err(Error::domain(format!("k_grid entry out of [3, n-1]: {k}")));
            }
        }
        for &c in &self.quantile_p_factors {
            let p = 1.0 / (c * self.n as f64);
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!(
                    "factor c = {c} gives p = {p} outside (0, 1)"
                )));
            }
        }
        if self.tau_grid.is_empty() {
            return Err(Error::domain("tau grid is empty"));
        }
        if self.estimators.is_empty() {
            return Err(Error::domain("no estimators requested"));
        }
        Ok(())
    }

    fn sample_spec(&self) -> TemperedSampleSpec {
        TemperedSampleSpec {
            n: self.n,
            seed: self.seed,
            ..self.family
        }
    }
}

/// Ground truth used for error computations. The tail index is absent
/// for the log-normal family, which has no Pareto-type index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueValues {
    pub alpha: Option<f64>,
    pub tau: f64,
    pub quantiles: Vec<TrueQuantile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueQuantile {
    pub c: f64,
    pub p: f64,
    pub value: f64,
}

/// Aggregates for one estimator at one rank for one quantity.
/// Error statistics are present only when the truth is known, and
/// satisfy `rmse^2 = bias^2 + variance` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCell {
    pub estimator: EstimatorKind,
    pub k: usize,
    pub quantity: Quantity,
    /// Replications contributing a value to this cell.
    pub n: usize,
    pub mean: f64,
    pub bias: Option<f64>,
    pub variance: f64,
    pub rmse: Option<f64>,
}

/// Five-number summary with 1.5 IQR whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

impl BoxplotSummary {
    /// Summary of non-empty, finite values.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |q: f64| -> f64 {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let w = pos - lo as f64;
            v[lo] * (1.0 - w) + v[hi] * w
        };
        let q1 = quantile(0.25);
        let median = quantile(0.5);
        let q3 = quantile(0.75);
        let iqr = q3 - q1;
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let whisker_lo = v.iter().copied().find(|&x| x >= lo_fence).unwrap_or(v[0]);
        let whisker_hi = v
            .iter()
            .rev()
            .copied()
            .find(|&x| x <= hi_fence)
            .unwrap_or(v[v.len() - 1]);
        let outliers = v
            .iter()
            .copied()
            .filter(|&x| x < lo_fence || x > hi_fence)
            .collect();
        Some(Self {
            q1,
            median,
            q3,
            whisker_lo,
            whisker_hi,
            outliers,
        })
    }
}

/// Per-replication values of one quantity at the adaptive rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveCell {
    pub estimator: EstimatorKind,
    pub quantity: Quantity,
    pub values: Vec<f64>,
    pub summary: Option<BoxplotSummary>,
}

/// Everything a study run produces. Deliberately contains no wall-clock
/// data: two runs with the same config are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub truth: TrueValues,
    pub curves: Vec<CurveCell>,
    pub adaptive: Vec<AdaptiveCell>,
    /// Adaptive rank chosen in each replication.
    pub k_hat: Vec<usize>,
    pub n_completed: usize,
    pub failures: Vec<String>,
}

/// Exact upper quantile of `X = min(Y, W)`: solves
/// `P(Y > z) P(W > z) = p` by bisection on `log z`.
pub fn true_quantile(spec: &TemperedSampleSpec, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1): {p}")));
    }
    spec.validate()?;
    let g = |t: f64| spec.survival(t.exp()) - p;
    let (mut lo, mut hi);
    if g(0.0) > 0.0 {
        lo = 0.0;
        hi = roots::grow_until(1.0, 2.0, 200, |t| g(t) < 0.0, "true_quantile")?;
    } else {
        hi = 0.0;
        lo = -roots::grow_until(1.0, 2.0, 200, |t| g(-t) > 0.0, "true_quantile")?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Ranks and per-estimator values recorded by one replication.
struct RepRecord {
    k_hat: usize,
    per_k: Vec<KEstimates>,
}

struct KEstimates {
    k: usize,
    wls: FitResult,
    mle: FitResult,
    alpha_hill: Option<f64>,
    alpha_trunc: Option<f64>,
    q_wls: Vec<Option<f64>>,
    q_mle: Vec<Option<f64>>,
    q_weissman: Vec<Option<f64>>,
}

fn run_replication(cfg: &StudyConfig, rep: u64, recorded: &[usize]) -> Result<RepRecord> {
    let sample = sample_tempered_stream(&cfg.sample_spec(), rep)?;
    let k_hat = select_k_hat(cfg, &sample)?;

    let mut ks: Vec<usize> = recorded.to_vec();
    if !ks.contains(&k_hat) {
        ks.push(k_hat);
        ks.sort_unstable();
    }

    let ps: Vec<f64> = cfg
        .quantile_p_factors
        .iter()
        .map(|c| 1.0 / (c * cfg.n as f64))
        .collect();

    let mut per_k = Vec::with_capacity(ks.len());
    let mut powers = Vec::new();
    for &k in &ks {
        let pot = PotView::from_sample(&sample, k)?;
        let grid = fit_k_grid(&pot, &cfg.tau_grid, cfg.weights, &mut powers)?;
        let (wls, mle) = winners_from_grid(&pot, &grid);
        let hill = hill_from_pot(&pot);
        let alpha_trunc = truncated_alpha_from_pot(&pot).ok();
        let q_wls = ps
            .iter()
            .map(|&p| extreme_quantile(&wls, &sample, k, p).ok())
            .collect();
        let q_mle = ps
            .iter()
            .map(|&p| extreme_quantile(&mle, &sample, k, p).ok())
            .collect();
        let q_weissman = ps
            .iter()
            .map(|&p| weissman_quantile(&sample, k, p).ok())
            .collect();
        per_k.push(KEstimates {
            k,
            wls,
            mle,
            alpha_hill: hill.alpha,
            alpha_trunc,
            q_wls,
            q_mle,
            q_weissman,
        });
    }
    Ok(RepRecord { k_hat, per_k })
}

fn select_k_hat(cfg: &StudyConfig, sample: &Sample) -> Result<usize> {
    let k_max = cfg.k_select_max.unwrap_or(cfg.n - 1);
    let mut powers = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for k in cfg.k_select_min..=k_max {
        let pot = match PotView::from_sample(sample, k) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let ss = match crate::fit::wls_winner(&pot, &cfg.tau_grid, cfg.weights, &mut powers) {
            Ok((_, _, _, ss)) => ss / k as f64,
            Err(_) => continue,
        };
        if ss.is_finite() && best.map_or(true, |(_, b)| ss < b) {
            best = Some((k, ss));
        }
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| Error::degenerate("goodness-of-fit scan failed at every rank"))
}

/// Run the full study. Per-replication failures are recorded and
/// excluded from the aggregates, never fatal.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;

    let mut recorded: Vec<usize> = cfg.k_grid.clone();
    recorded.sort_unstable();
    recorded.dedup();

    let truth = TrueValues {
        alpha: cfg.family.base.tail_index(),
        tau: cfg.family.tau,
        quantiles: cfg
            .quantile_p_factors
            .iter()
            .map(|&c| {
                let p = 1.0 / (c * cfg.n as f64);
                Ok(TrueQuantile {
                    c,
                    p,
                    value: true_quantile(&cfg.sample_spec(), p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let reps: Vec<std::result::Result<RepRecord, String>> = (0..cfg.n_reps as u64)
        .into_par_iter()
        .map(|r| run_replication(cfg, r, &recorded).map_err(|e| format!("replication {r}: {e}")))
        .collect();

    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for r in reps {
        match r {
            Ok(rec) => ok.push(rec),
            Err(msg) => failures.push(msg),
        }
    }
    if ok.is_empty() {
        return Err(Error::degenerate(format!(
            "every replication failed; first failure: {}",
            failures.first().cloned().unwrap_or_default()
        )));
    }

    let mut curves = Vec::new();
    for &k in &recorded {
        collect_cells(cfg, &truth, &ok, CellSite::AtRank(k), &mut curves);
    }
    let mut adaptive_curve = Vec::new();
    collect_cells(cfg, &truth, &ok, CellSite::AtKHat, &mut adaptive_curve);
    let adaptive = adaptive_curve
        .into_iter()
        .map(|(cell, values)| AdaptiveCell {
            estimator: cell.estimator,
            quantity: cell.quantity,
            summary: BoxplotSummary::from_values(&values),
            values,
        })
        .collect();

    Ok(StudyResult {
        config: cfg.clone(),
        truth: truth.clone(),
        curves: curves.into_iter().map(|(c, _)| c).collect(),
        adaptive,
        k_hat: ok.iter().map(|r| r.k_hat).collect(),
        n_completed: ok.len(),
        failures,
    })
}

enum CellSite {
    AtRank(usize),
    AtKHat,
}

fn collect_cells(
    cfg: &StudyConfig,
    truth: &TrueValues,
    reps: &[RepRecord],
    site: CellSite,
    out: &mut Vec<(CurveCell, Vec<f64>)>,
) {
    let pick = |rep: &RepRecord| -> Option<usize> {
        let k = match site {
            CellSite::AtRank(k) => k,
            CellSite::AtKHat => rep.k_hat,
        };
        rep.per_k.iter().position(|e| e.k == k)
    };
    let k_label = match site {
        CellSite::AtRank(k) => k,
        CellSite::AtKHat => 0, // adaptive cells carry no fixed rank
    };

    for &est in &cfg.estimators {
        let mut push = |quantity: Quantity, values: Vec<f64>, truth_value: Option<f64>| {
            if values.is_empty() {
                return;
            }
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let variance =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let bias = truth_value.map(|t| mean - t);
            let rmse = bias.map(|b| (b * b + variance).sqrt());
            out.push((
                CurveCell {
                    estimator: est,
                    k: k_label,
                    quantity,
                    n,
                    mean,
                    bias,
                    variance,
                    rmse,
                },
                values,
            ));
        };

        let gather = |f: &dyn Fn(&KEstimates) -> Option<f64>| -> Vec<f64> {
            reps.iter()
                .filter_map(|rep| pick(rep).and_then(|i| f(&rep.per_k[i])))
                .filter(|v| v.is_finite())
                .collect()
        };

        match est {
            EstimatorKind::Wls => {
                push(Quantity::Alpha, gather(&|e| Some(e.wls.params.alpha)), truth.alpha);
                push(Quantity::Tau, gather(&|e| Some(e.wls.params.tau)), Some(truth.tau));
                for (ci, tq) in truth.quantiles.iter().enumerate() {
                    push(
                        Quantity::Quantile { c: tq.c },
                        gather(&|e| e.q_wls[ci]),
                        Some(tq.value),
                    );
                }
            }
            EstimatorKind::Mle => {
                push(Quantity::Alpha, gather(&|e| Some(e.mle.params.alpha)), truth.alpha);
                push(Quantity::Tau, gather(&|e| Some(e.mle.params.tau)), Some(truth.tau));
                for (ci, tq) in truth.quantiles.iter().enumerate() {
                    push(
                        Quantity::Quantile { c: tq.c },
                        gather(&|e| e.q_mle[ci]),
                        Some(tq.value),
                    );
                }
            }
            EstimatorKind::Hill => {
                push(Quantity::Alpha, gather(&|e| e.alpha_hill), truth.alpha);
            }
            EstimatorKind::Weissman => {
                for (ci, tq) in truth.quantiles.iter().enumerate() {
                    push(
                        Quantity::Quantile { c: tq.c },
                        gather(&|e| e.q_weissman[ci]),
                        Some(tq.value),
                    );
                }
            }
            EstimatorKind::TruncatedPareto => {
                push(Quantity::Alpha, gather(&|e| e.alpha_trunc), truth.alpha);
            }
        }
    }
}

/// Evenly spaced ranks from `k_min` to `k_max` inclusive.
pub fn even_k_grid(k_min: usize, k_max: usize, points: usize) -> Vec<usize> {
    assert!(k_min <= k_max && points >= 1);
    if points == 1 || k_min == k_max {
        return vec![k_max];
    }
    let mut ks: Vec<usize> = (0..points)
        .map(|i| {
            k_min + ((k_max - k_min) as f64 * i as f64 / (points - 1) as f64).round() as usize
        })
        .collect();
    ks.dedup();
    ks
}

/// The six simulation designs studied in the literature this crate
/// follows: two tempered Burr settings, two tempered Fréchet settings,
/// one tempered strict Pareto and one tempered log-normal, each with
/// `n = 500` and 500 replications.
pub fn paper_scenarios() -> Vec<StudyConfig> {
    let designs: [(&str, BaseFamily, f64, f64, Vec<f64>); 6] = [
        (
            "burr-weibull-strong",
            BaseFamily::Burr { alpha: 2.0, xi: -1.0 },
            1.5,
            0.5,
            vec![1.0, 2.0],
        ),
        (
            "burr-weibull-weak",
            BaseFamily::Burr { alpha: 2.0, xi: -1.0 },
            0.5,
            0.2,
            vec![1.0, 2.0],
        ),
        (
            "frechet-weibull-strong",
            BaseFamily::Frechet { alpha: 2.0 },
            2.0,
            0.5,
            vec![1.0, 2.0],
        ),
        (
            "frechet-weibull-weak",
            BaseFamily::Frechet { alpha: 2.0 },
            0.5,
            0.2,
            vec![1.0, 2.0],
        ),
        (
            "pareto-weibull",
            BaseFamily::Pareto { alpha: 1.0 },
            2.0,
            0.2,
            vec![1.0, 2.0],
        ),
        (
            "lognormal-weibull",
            BaseFamily::LogNormal { mu: 0.0, sigma: 10.0 },
            1.5,
            0.5,
            vec![0.2, 0.4],
        ),
    ];
    designs
        .into_iter()
        .enumerate()
        .map(|(i, (name, base, tau, beta, factors))| {
            let n = 500;
            StudyConfig {
                name: name.to_string(),
                family: TemperedSampleSpec {
                    base,
                    tau,
                    beta,
                    n,
                    seed: 0,
                },
                n,
                n_reps: 500,
                k_grid: even_k_grid(10, n - 1, 25),
                k_select_min: 10,
                k_select_max: None,
                tau_grid: FitOptions::default_tau_grid(),
                quantile_p_factors: factors,
                seed: 1000 + i as u64,
                estimators: ALL_ESTIMATORS.to_vec(),
                weights: WeightScheme::Hill,
            }
        })
        .collect()
}
