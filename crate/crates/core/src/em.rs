//! Maximum-likelihood fit of a zero-mean normal mixture to z-values by EM,
//! with best-of-R restarts and BIC selection of the number of components.
//!
//! The zero-mean likelihood depends on each observation only through z², so
//! the fit runs on the sorted squares. That makes it exactly invariant to
//! the order of the input and to flipping signs.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ZMixture;
use crate::numeric::log_sum_exp;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest number of components [`select_components`] will try.
pub const MAX_COMPONENTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop when the log-likelihood changes by less than this fraction.
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub weight_floor: f64,
    pub sigma_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            rel_tol: 1e-8,
            restarts: 10,
            seed: 0,
            weight_floor: 1e-6,
            sigma_floor: 1e-3,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::invalid("rel_tol must be > 0"));
        }
        if self.restarts < 1 {
            return Err(Error::invalid("restarts must be >= 1"));
        }
        let weight_ok = self.weight_floor > 0.0 && self.weight_floor < 1.0;
        if !weight_ok || self.sigma_floor.is_nan() || self.sigma_floor <= 0.0 {
            return Err(Error::invalid("weight and sigma floors must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub loglik: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub bic: f64,
    pub restart_index: usize,
    /// Log-likelihood before each M-step of the winning run, ending with the
    /// log-likelihood of the returned parameters.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loglik_trace: Vec<f64>,
}

/// `−2·loglik + (2K − 1)·ln n`: K − 1 free weights plus K sds.
pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    -2.0 * loglik + (2 * k - 1) as f64 * (n as f64).ln()
}

struct Run {
    weights: Vec<f64>,
    sigmas: Vec<f64>,
    trace: Vec<f64>,
    n_iter: usize,
    converged: bool,
}

/// Sorted squares of the data, after input checks.
fn squared_data(zs: &[f64], k: usize) -> Result<Vec<f64>> {
    if zs.is_empty() {
        return Err(Error::invalid("cannot fit a mixture to no data"));
    }
    if let Some(bad) = zs.iter().find(|z| !z.is_finite()) {
        return Err(Error::invalid(format!("z-values must be finite, found {bad}")));
    }
    if k < 1 || k > zs.len() {
        return Err(Error::invalid(format!(
            "number of components must lie in 1..={}, got {k}",
            zs.len()
        )));
    }
    let mut sq: Vec<f64> = zs.iter().map(|z| z * z).collect();
    sq.sort_by(f64::total_cmp);
    if sq[sq.len() - 1] == 0.0 {
        return Err(Error::DegenerateFit("all z-values are exactly zero".into()));
    }
    Ok(sq)
}

/// Geometric ladder of K sds between half the RMS and twice the largest
/// |z| over 1.96.
fn initial_ladder(sq: &[f64], k: usize) -> Vec<f64> {
    let rms = (sq.iter().sum::<f64>() / sq.len() as f64).sqrt();
    let lo = 0.5 * rms;
    let hi = (2.0 * sq[sq.len() - 1].sqrt() / 1.96).max(lo);
    if k == 1 {
        return vec![(lo * hi).sqrt()];
    }
    (0..k)
        .map(|j| lo * (hi / lo).powf(j as f64 / (k - 1) as f64))
        .collect()
}

fn restart_sigmas(ladder: &[f64], seed: u64, restart: usize) -> Vec<f64> {
    if restart == 0 {
        return ladder.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    ladder
        .iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            s * (0.5 * e).exp()
        })
        .collect()
}

fn apply_weight_floor(weights: &mut [f64], floor: f64) {
    for w in weights.iter_mut() {
        *w = w.max(floor);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}

fn run_em(sq: &[f64], mut sigmas: Vec<f64>, cfg: &EmConfig) -> Run {
    let k = sigmas.len();
    let n = sq.len() as f64;
    let mut weights = vec![1.0 / k as f64; k];
    for s in sigmas.iter_mut() {
        *s = s.max(cfg.sigma_floor);
    }
    let mut trace = Vec::new();
    let mut logs = vec![0.0; k];
    let mut dens = vec![0.0; k];
    let mut n_iter = 0;
    let mut converged = false;
    loop {
        // E-step, accumulating the sufficient statistics on the way. Work
        // with w_k/σ_k · exp(−x/2σ_k²) directly and drop to log space only
        // when every component underflows.
        let scale: Vec<f64> = weights.iter().zip(&sigmas).map(|(w, s)| w / s).collect();
        let log_scale: Vec<f64> = scale.iter().map(|c| c.ln()).collect();
        let half_prec: Vec<f64> = sigmas.iter().map(|s| -0.5 / (s * s)).collect();
        let mut resp_sum = vec![0.0; k];
        let mut resp_sq = vec![0.0; k];
        let mut loglik = 0.0;
        for &x in sq {
            let mut total = 0.0;
            for j in 0..k {
                dens[j] = scale[j] * (half_prec[j] * x).exp();
                total += dens[j];
            }
            if total > f64::MIN_POSITIVE {
                loglik += total.ln();
                let inv = 1.0 / total;
                for j in 0..k {
                    let r = dens[j] * inv;
                    resp_sum[j] += r;
                    resp_sq[j] += r * x;
                }
            } else {
                for j in 0..k {
                    logs[j] = log_scale[j] + half_prec[j] * x;
                }
                let lse = log_sum_exp(&logs);
                loglik += lse;
                for j in 0..k {
                    let r = (logs[j] - lse).exp();
                    resp_sum[j] += r;
                    resp_sq[j] += r * x;
                }
            }
        }
        loglik -= n * LN_SQRT_2PI;
        if let Some(&prev) = trace.last() {
            let change: f64 = loglik - prev;
            if change.abs() < cfg.rel_tol * f64::abs(prev) || change.abs() < 1e-12 {
                converged = true;
            }
        }
        trace.push(loglik);
        if converged || n_iter == cfg.max_iter {
            break;
        }
        // M-step: zero-mean MLE, no mean update.
        for j in 0..k {
            weights[j] = resp_sum[j] / n;
            if resp_sum[j] > 0.0 {
                sigmas[j] = (resp_sq[j] / resp_sum[j]).sqrt().max(cfg.sigma_floor);
            }
        }
        apply_weight_floor(&mut weights, cfg.weight_floor);
        n_iter += 1;
    }
    Run { weights, sigmas, trace, n_iter, converged }
}

/// Fits a K-component zero-mean normal mixture and returns the best of
/// `cfg.restarts` EM runs by final log-likelihood.
pub fn fit_em(zs: &[f64], k: usize, cfg: &EmConfig) -> Result<(ZMixture, FitDiagnostics)> {
    cfg.validate()?;
    let sq = squared_data(zs, k)?;
    let ladder = initial_ladder(&sq, k);
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_em(&sq, restart_sigmas(&ladder, cfg.seed, r), cfg))
        .collect();
    let (restart_index, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| {
            let la = *a.1.trace.last().unwrap();
            let lb = *b.1.trace.last().unwrap();
            if lb > la {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    let loglik = *best.trace.last().unwrap();
    if !loglik.is_finite() {
        return Err(Error::DegenerateFit(format!("log-likelihood is {loglik}")));
    }
    let mixture = ZMixture::new(best.weights, best.sigmas)?;
    let diagnostics = FitDiagnostics {
        loglik,
        n_iter: best.n_iter,
        converged: best.converged,
        bic: bic(loglik, k, zs.len()),
        restart_index,
        loglik_trace: best.trace,
    };
    Ok((mixture, diagnostics))
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub mixture: ZMixture,
    pub diagnostics: FitDiagnostics,
    pub chosen_k: usize,
    /// `(K, BIC)` for every K tried.
    pub bic_by_k: Vec<(usize, f64)>,
}

/// Fits every K in the range and keeps the fit with the smallest BIC, the
/// smaller K winning ties.
pub fn select_components(zs: &[f64], k_range: RangeInclusive<usize>, cfg: &EmConfig) -> Result<Selection> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 1 || hi > MAX_COMPONENTS || lo > hi {
        return Err(Error::invalid(format!(
            "component range {lo}..={hi} must be nonempty and within 1..={MAX_COMPONENTS}"
        )));
    }
    let mut best: Option<Selection> = None;
    let mut bic_by_k = Vec::new();
    for k in k_range {
        let (mixture, diagnostics) = fit_em(zs, k, cfg)?;
        bic_by_k.push((k, diagnostics.bic));
        if best.as_ref().is_none_or(|b| diagnostics.bic < b.diagnostics.bic) {
            best = Some(Selection { mixture, diagnostics, chosen_k: k, bic_by_k: Vec::new() });
        }
    }
    let mut best = best.expect("range is nonempty");
    best.bic_by_k = bic_by_k;
    Ok(best)
}
