//! QQ-plot and derivative-plot data for tail diagnostics.
//!
//! The Pareto QQ-plot pairs `-log(1 - j/(n+1))` with `log x(j)`; a
//! power-law tail shows up as an ultimately linear pattern with slope
//! `1/alpha`. The Weibull QQ-plot uses `log(-log(1 - j/(n+1)))` on the
//! horizontal axis and is linear with slope `1/tau` under a Weibull
//! tail. Derivative plots track the anchored slope over the top `k`
//! points as `k` varies; a plateau confirms the corresponding tail
//! shape, and on the Pareto plot the anchored slope is the QQ-space
//! counterpart of the Hill estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::pot::PotView;
use crate::sample::Sample;

/// What a series of points represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QQKind {
    ParetoQq,
    WeibullQq,
    /// Anchored slopes of a QQ-plot as a function of `k`.
    DerivativePlot,
    /// Fitted-versus-theoretical line for a tempered fit.
    FittedLine,
}

/// A plottable series: `points` are `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QQSeries {
    pub kind: QQKind,
    pub label: String,
    /// Rank the series is associated with, when applicable.
    pub k: Option<usize>,
    pub points: Vec<[f64; 2]>,
}

fn require_n2(s: &Sample) -> Result<()> {
    if s.n() < 2 {
        return Err(Error::domain("QQ plots need at least two observations"));
    }
    Ok(())
}

/// `(-log(1 - j/(n+1)), log x(j))` for `j = 1..n`.
pub fn pareto_qq(s: &Sample) -> Result<QQSeries> {
    require_n2(s)?;
    let n = s.n();
    let points = (1..=n)
        .map(|j| {
            let x = -(1.0 - j as f64 / (n + 1) as f64).ln();
            [x, s.order(j).ln()]
        })
        .collect();
    Ok(QQSeries {
        kind: QQKind::ParetoQq,
        label: "pareto_qq".into(),
        k: None,
        points,
    })
}

/// `(log(-log(1 - j/(n+1))), log x(j))` for `j = 1..n`.
pub fn weibull_qq(s: &Sample) -> Result<QQSeries> {
    require_n2(s)?;
    let n = s.n();
    let points = (1..=n)
        .map(|j| {
            let x = (-(1.0 - j as f64 / (n + 1) as f64).ln()).ln();
            [x, s.order(j).ln()]
        })
        .collect();
    Ok(QQSeries {
        kind: QQKind::WeibullQq,
        label: "weibull_qq".into(),
        k: None,
        points,
    })
}

/// Anchored slope of the top `k` points of a QQ-plot, for each `k` in
/// `k_range = (k_lo, k_hi)` inclusive:
///
/// ```text
/// slope(k) = sum_{j=1..k} (y(n-j+1) - y(n-k)) / sum_{j=1..k} (x(n-j+1) - x(n-k))
/// ```
///
/// Emitted as points `(k, slope(k))`.
pub fn derivative_plot(qq: &QQSeries, k_range: (usize, usize)) -> Result<QQSeries> {
    if !matches!(qq.kind, QQKind::ParetoQq | QQKind::WeibullQq) {
        return Err(Error::domain(
            "derivative plots are defined for Pareto or Weibull QQ series",
        ));
    }
    let n = qq.points.len();
    let (k_lo, k_hi) = k_range;
    if k_lo < 1 || k_hi > n - 1 || k_lo > k_hi {
        return Err(Error::domain(format!(
            "k range [{k_lo}, {k_hi}] invalid for n = {n}"
        )));
    }
    let mut points = Vec::with_capacity(k_hi - k_lo + 1);
    for k in k_lo..=k_hi {
        let anchor = qq.points[n - k - 1];
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 1..=k {
            let p = qq.points[n - j];
            num += p[1] - anchor[1];
            den += p[0] - anchor[0];
        }
        if den == 0.0 {
            return Err(Error::degenerate(format!(
                "zero x-spread in derivative plot at k = {k}"
            )));
        }
        points.push([k as f64, num / den]);
    }
    Ok(QQSeries {
        kind: QQKind::DerivativePlot,
        label: format!("{}_derivative", qq.label),
        k: None,
        points,
    })
}

/// Goodness-of-fit line for a fitted triple on the POT ratios: pairs the
/// plotting position `-log(1 - j/(k+1))` of the `j`-th smallest ratio
/// with the fitted transform
/// `alpha log v + delta h_tau(v)`, which should hug the identity when
/// the model fits. Returns the fitted series and the 45-degree
/// reference line.
pub fn fitted_qq_line(pot: &PotView, fit: &FitResult) -> Result<(QQSeries, QQSeries)> {
    if fit.k != pot.k() {
        return Err(Error::domain(format!(
            "rank mismatch: fit has k = {}, view has k = {}",
            fit.k,
            pot.k()
        )));
    }
    let k = pot.k();
    let p = &fit.params;
    let delta = p.delta();
    let mut points = Vec::with_capacity(k);
    for j in 1..=k {
        // j-th smallest ratio is the (k-j+1)-th largest
        let v = pot.ratios()[k - j];
        let x = -(1.0 - j as f64 / (k + 1) as f64).ln();
        let y = p.alpha * v.ln() + delta * (v.powf(p.tau) - 1.0) / p.tau;
        points.push([x, y]);
    }
    let x_max = points.last().map(|p| p[0]).unwrap_or(1.0);
    let fitted = QQSeries {
        kind: QQKind::FittedLine,
        label: format!(
            "fitted_{}",
            match fit.method {
                crate::fit::Method::Wls => "wls",
                crate::fit::Method::Mle => "mle",
            }
        ),
        k: Some(k),
        points,
    };
    let reference = QQSeries {
        kind: QQKind::FittedLine,
        label: "identity".into(),
        k: Some(k),
        points: vec![[0.0, 0.0], [x_max, x_max]],
    };
    Ok((fitted, reference))
}
