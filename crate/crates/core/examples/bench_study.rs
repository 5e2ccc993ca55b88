use ttail_core::family::{sample_tempered_stream, BaseFamily, TemperedSampleSpec};
use ttail_core::fit::{fit_k, FitOptions};
use ttail_core::pot::PotView;
use ttail_core::wls::{fit_wls_fixed_tau, WeightScheme};

fn alpha_trace(s: &ttail_core::Sample, grid: &[f64], k_lo: usize, k_hi: usize) -> Vec<(usize, f64)> {
    (k_lo..=k_hi).map(|k| {
        let pot = PotView::from_sample(s, k).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for &t in grid {
            if let Ok(f) = fit_wls_fixed_tau(&pot, t, WeightScheme::Hill) {
                if f.objective < best.0 { best = (f.objective, f.alpha); }
            }
        }
        (k, best.1)
    }).collect()
}

fn smooth_trace(tr: &[(usize, f64)], frac: f64, floor: usize) -> Vec<(usize, f64)> {
    (0..tr.len()).map(|i| {
        let k = tr[i].0;
        let w = ((k as f64 * frac) as usize).max(floor);
        let lo = tr.partition_point(|&(kk, _)| kk < k.saturating_sub(w));
        let hi = tr.partition_point(|&(kk, _)| kk <= k + w);
        (k, tr[lo..hi].iter().map(|&(_, v)| v).sum::<f64>() / (hi - lo) as f64)
    }).collect()
}

fn stability_curve(tr: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let sm = smooth_trace(tr, 0.12, 8);
    (0..sm.len()).map(|i| {
        let k = sm[i].0;
        let w = (k / 2).max(32);
        let lo = sm.partition_point(|&(kk, _)| kk < k.saturating_sub(w));
        let hi = sm.partition_point(|&(kk, _)| kk <= k + w);
        let mut vals: Vec<f64> = sm[lo..hi].iter().map(|&(_, a)| a).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| vals[((vals.len() - 1) as f64 * p) as usize];
        let med = q(0.5);
        let s = if med > 0.0 { (q(0.75) - q(0.25)) / med } else { f64::INFINITY };
        (k, s)
    }).collect()
}

fn khat(tr: &[(usize, f64)], tol: f64) -> usize {
    let st = stability_curve(tr);
    let s_min = st.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    st.iter().rev().find(|&&(_, s)| s <= (1.0 + tol) * s_min).map(|&(k, _)| k).unwrap()
}

fn main() {
    let grid = FitOptions::default_tau_grid();
    let n = 500usize;
    let reps = 100u64;
    for tol in [0.15f64, 0.25, 0.4] {
        println!("### tol = {tol}");
        for seed in [77u64, 300, 1234] {
            for (name, base, tau, beta) in [
                ("pareto-w", BaseFamily::Pareto { alpha: 1.0 }, 2.0, 0.2),
                ("burr-w  ", BaseFamily::Burr { alpha: 2.0, xi: -1.0 }, 1.5, 0.5),
            ] {
                let spec = TemperedSampleSpec { base, tau, beta, n, seed };
                let (mut alphas, mut taus, mut ks) = (Vec::new(), Vec::new(), Vec::new());
                for r in 0..reps {
                    let s = sample_tempered_stream(&spec, r).unwrap();
                    let tr = alpha_trace(&s, &grid, 10, 499);
                    let k_hat = khat(&tr, tol);
                    let pot = PotView::from_sample(&s, k_hat).unwrap();
                    let (_, mle) = fit_k(&pot, &grid, WeightScheme::Hill).unwrap();
                    alphas.push(mle.params.alpha);
                    taus.push(mle.params.tau);
                    ks.push(k_hat);
                }
                let mean_a = alphas.iter().sum::<f64>() / reps as f64;
                let mut ts = taus; ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ks.sort_unstable();
                println!("  seed {seed} {name}: mean a = {mean_a:.3}, med tau = {:.2}, k_hat q = {}/{}/{}",
                    ts[ts.len()/2], ks[ks.len()/4], ks[ks.len()/2], ks[3*ks.len()/4]);
            }
        }
    }
}
