//! Asymptotic precision of the pseudo maximum likelihood estimator.
//!
//! At an interior parameter point the scaled estimation error of
//! `(alpha, lambda, tau)` is asymptotically normal with covariance
//! `I^(-1)` and, under a second-order slow-variation condition with
//! constants `(D, rho, nu)`, mean `D nu I^(-1) b`. The entries of the
//! 3x3 information matrix `I` and the bias integrands `b` are explicit
//! integrals over `[1, inf)`; they are evaluated here by adaptive
//! quadrature and cross-checked by a Monte Carlo estimate of the score
//! covariance, which by the information identity must agree entrywise.
//!
//! The plug-in for the effective sample size is the exceedance count `k`,
//! giving the finite-sample covariance `I^(-1) / k`.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::model::{draw_limit, h_tau_raw, TemperedParams};
use crate::quad::integrate_upper;
use crate::rng::stream_rng;

const QUAD_TOL: f64 = 1e-9;

/// Second-order slow-variation constants for the bias term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderSpec {
    pub d: f64,
    pub rho: f64,
    /// Limit of `sqrt(n F(t)) t^rho`.
    pub nu: f64,
}

impl SecondOrderSpec {
    pub fn new(d: f64, rho: f64, nu: f64) -> Result<Self> {
        if !(rho < 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("rho must be negative: {rho}")));
        }
        if !(nu > 0.0 && nu.is_finite()) || !d.is_finite() {
            return Err(Error::domain(format!(
                "need finite D and nu > 0, got ({d}, {nu})"
            )));
        }
        Ok(Self { d, rho, nu })
    }
}

/// Information matrix, asymptotic bias and finite-sample covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInfo {
    /// Fisher information in the order `(alpha, lambda, tau)`.
    pub info: [[f64; 3]; 3],
    /// Asymptotic-scale bias `D nu I^(-1) b`; zero without second-order input.
    pub bias: [f64; 3],
    /// `I^(-1) / k_eff`.
    pub cov: [[f64; 3]; 3],
    pub k_eff: f64,
}

fn require_interior(p: &TemperedParams) -> Result<()> {
    if p.lambda <= 0.0 {
        return Err(Error::domain(
            "information matrix needs an interior point (lambda > 0)",
        ));
    }
    Ok(())
}

/// The `(1,1)` information entry alone; unlike the full matrix this is
/// well defined at `lambda = 0`, where it equals `1/alpha^2`.
pub fn fisher_i11(p: &TemperedParams) -> Result<f64> {
    let (alpha, lambda, tau) = (p.alpha, p.lambda, p.tau);
    integrate_upper(
        move |u| {
            let ut = u.powf(tau);
            let mix = alpha + lambda * tau * ut;
            (-(alpha + 1.0) * u.ln() - lambda * (ut - 1.0)).exp() / mix
        },
        QUAD_TOL,
        "I[1,1]",
    )
}

/// The full 3x3 Fisher information at an interior parameter point,
/// symmetric by construction.
pub fn fisher_info(p: &TemperedParams) -> Result<[[f64; 3]; 3]> {
    require_interior(p)?;
    let (alpha, lambda, tau) = (p.alpha, p.lambda, p.tau);
    // common factors: w(u) = u^(-alpha-1) e^(-lambda (u^tau - 1)),
    // mix(u) = alpha + lambda tau u^tau (the density is w * mix)
    let base = move |u: f64| -> (f64, f64, f64, f64) {
        let lu = u.ln();
        let ut = u.powf(tau);
        let w = (-(alpha + 1.0) * lu - lambda * (ut - 1.0)).exp();
        let mix = alpha + lambda * tau * ut;
        (lu, ut, w, mix)
    };

    let i11 = fisher_i11(p)?;
    let i12 = integrate_upper(
        move |u| {
            let (_, ut, w, mix) = base(u);
            tau * ut * w / mix
        },
        QUAD_TOL,
        "I[1,2]",
    )?;
    let i13 = integrate_upper(
        move |u| {
            let (lu, ut, w, mix) = base(u);
            lambda * (1.0 + tau * lu) * ut * w / mix
        },
        QUAD_TOL,
        "I[1,3]",
    )?;
    let i22 = integrate_upper(
        move |u| {
            let (_, ut, w, mix) = base(u);
            tau * tau * ut * ut * w / mix
        },
        QUAD_TOL,
        "I[2,2]",
    )?;
    let i23 = integrate_upper(
        move |u| {
            let (lu, ut, w, mix) = base(u);
            (lu - alpha * (1.0 + tau * lu) / (mix * mix)) * ut * w * mix
        },
        QUAD_TOL,
        "I[2,3]",
    )?;
    let i33 = integrate_upper(
        move |u| {
            let (lu, ut, w, mix) = base(u);
            let inner = lu * lu - 2.0 * lu / mix
                + (lambda * ut * (1.0 + 2.0 * tau * lu) - alpha * tau * lu * lu) / (mix * mix);
            lambda * inner * ut * w * mix
        },
        QUAD_TOL,
        "I[3,3]",
    )?;

    Ok([[i11, i12, i13], [i12, i22, i23], [i13, i23, i33]])
}

/// The raw bias integrals `b = (b1, b2, b3)`: the score components
/// integrated against the second-order perturbation of the POT law.
pub fn bias_integrals(p: &TemperedParams, so: &SecondOrderSpec) -> Result<[f64; 3]> {
    require_interior(p)?;
    let (alpha, lambda, tau) = (p.alpha, p.lambda, p.tau);
    let rho = so.rho;
    // perturbation weight: u^(-alpha-1) e^(-lambda (u^tau-1)) [h_rho(u) mix - u^rho]
    let pert = move |u: f64| -> (f64, f64, f64) {
        let lu = u.ln();
        let ut = u.powf(tau);
        let mix = alpha + lambda * tau * ut;
        let w = (-(alpha + 1.0) * lu - lambda * (ut - 1.0)).exp()
            * (h_tau_raw(u, rho) * mix - u.powf(rho));
        (lu, ut, w)
    };
    let b1 = integrate_upper(
        move |u| {
            let (lu, ut, w) = pert(u);
            let mix = alpha + lambda * tau * ut;
            (1.0 / mix - lu) * w
        },
        QUAD_TOL,
        "b[1]",
    )?;
    let b2 = integrate_upper(
        move |u| {
            let (_, ut, w) = pert(u);
            let mix = alpha + lambda * tau * ut;
            (tau * ut / mix - (ut - 1.0)) * w
        },
        QUAD_TOL,
        "b[2]",
    )?;
    let b3 = integrate_upper(
        move |u| {
            let (lu, ut, w) = pert(u);
            let mix = alpha + lambda * tau * ut;
            lambda * ut * ((1.0 + tau * lu) / mix - lu) * w
        },
        QUAD_TOL,
        "b[3]",
    )?;
    Ok([b1, b2, b3])
}

fn to_matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

fn invert_spd(info: &[[f64; 3]; 3]) -> Result<Matrix3<f64>> {
    let m = to_matrix(info);
    match nalgebra::Cholesky::new(m) {
        Some(chol) => Ok(chol.inverse()),
        None => {
            let eig = m.symmetric_eigenvalues();
            Err(Error::numeric(format!(
                "information matrix is not positive definite (eigenvalues {:?})",
                eig.as_slice()
            )))
        }
    }
}

/// The asymptotic bias `D nu I^(-1) b`.
pub fn bias_vector(p: &TemperedParams, so: &SecondOrderSpec) -> Result<[f64; 3]> {
    if so.d == 0.0 {
        return Ok([0.0; 3]);
    }
    let info = fisher_info(p)?;
    let b = bias_integrals(p, so)?;
    let inv = invert_spd(&info)?;
    let v = inv * Vector3::new(b[0], b[1], b[2]) * (so.d * so.nu);
    Ok([v[0], v[1], v[2]])
}

/// Information, bias and the finite-sample covariance `I^(-1)/k_eff`.
pub fn asymptotic_cov(
    p: &TemperedParams,
    k_eff: f64,
    so: Option<&SecondOrderSpec>,
) -> Result<AsymptoticInfo> {
    if !(k_eff >= 1.0 && k_eff.is_finite()) {
        return Err(Error::domain(format!("k_eff must be >= 1, got {k_eff}")));
    }
    let info = fisher_info(p)?;
    let inv = invert_spd(&info)?;
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = inv[(i, j)] / k_eff;
        }
    }
    let bias = match so {
        Some(so) => {
            if so.d == 0.0 {
                [0.0; 3]
            } else {
                let b = bias_integrals(p, so)?;
                let v = inv * Vector3::new(b[0], b[1], b[2]) * (so.d * so.nu);
                [v[0], v[1], v[2]]
            }
        }
        None => [0.0; 3],
    };
    Ok(AsymptoticInfo {
        info,
        bias,
        cov,
        k_eff,
    })
}

/// Wald intervals `theta_i -/+ z * se_i` at the given level for a
/// converged fit; the `alpha` and `tau` intervals are truncated below
/// at zero.
pub fn confidence_interval(
    fit: &FitResult,
    k_eff: f64,
    level: f64,
) -> Result<[(f64, f64); 3]> {
    if !fit.converged {
        return Err(Error::domain(
            "confidence intervals need a converged fit",
        ));
    }
    if !(0.0..1.0).contains(&level) {
        return Err(Error::domain(format!("level must lie in [0, 1): {level}")));
    }
    let info = asymptotic_cov(&fit.params, k_eff, None)?;
    let z = Normal::standard().inverse_cdf(0.5 * (1.0 + level));
    let theta = [fit.params.alpha, fit.params.lambda, fit.params.tau];
    let mut out = [(0.0, 0.0); 3];
    for i in 0..3 {
        let se = info.cov[i][i].sqrt();
        let lo = theta[i] - z * se;
        let hi = theta[i] + z * se;
        out[i] = if i == 1 { (lo, hi) } else { (lo.max(0.0), hi) };
    }
    Ok(out)
}

/// Per-observation score of the limit log-density at `p`.
#[inline]
pub(crate) fn score3(u: f64, p: &TemperedParams) -> [f64; 3] {
    let lu = u.ln();
    let ut = u.powf(p.tau);
    let mix = p.alpha + p.lambda * p.tau * ut;
    [
        1.0 / mix - lu,
        p.tau * ut / mix - (ut - 1.0),
        p.lambda * ut * ((1.0 + p.tau * lu) / mix - lu),
    ]
}

/// Monte Carlo estimate of the score covariance `E[s s^T]` under the
/// limit law: the independent cross-check of [`fisher_info`]. Also used
/// to sanity-check that the mean score vanishes at the true parameters.
pub fn mc_fisher_oracle(
    p: &TemperedParams,
    n_draws: usize,
    seed: u64,
) -> Result<[[f64; 3]; 3]> {
    let (moments, _) = mc_score_moments(p, n_draws, seed)?;
    Ok(moments)
}

/// Second moment matrix and mean of the score over `n_draws` draws.
pub fn mc_score_moments(
    p: &TemperedParams,
    n_draws: usize,
    seed: u64,
) -> Result<([[f64; 3]; 3], [f64; 3])> {
    require_interior(p)?;
    if n_draws < 10_000 {
        return Err(Error::domain(format!(
            "need at least 10^4 draws, got {n_draws}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut m = [[0.0; 3]; 3];
    let mut mean = [0.0; 3];
    for _ in 0..n_draws {
        let u = draw_limit(1.0 - rng.gen::<f64>(), 1.0 - rng.gen::<f64>(), p);
        let s = score3(u, p);
        for i in 0..3 {
            mean[i] += s[i];
            for j in i..3 {
                m[i][j] += s[i] * s[j];
            }
        }
    }
    let nf = n_draws as f64;
    for i in 0..3 {
        mean[i] /= nf;
        for j in i..3 {
            m[i][j] /= nf;
            m[j][i] = m[i][j];
        }
    }
    Ok((m, mean))
}
