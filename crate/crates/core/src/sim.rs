//! Seeded simulation of trial populations, and brute-force Monte Carlo
//! oracles for the analytic quantities in [`crate::posterior`] and
//! [`crate::analytics`].
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), which produces the
//! same stream on every platform. Large oracle runs are split into chunks of
//! [`CHUNK`] draws; chunk `i` uses stream `i` of the seeded generator and the
//! chunks are concatenated in order, so results do not depend on the number
//! of worker threads.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytics::check_crit;
use crate::error::{ensure_finite, Error, Result};
use crate::model::{SnrPrior, TrialRecord};

pub const CHUNK: usize = 1 << 18;

/// Oracles refuse to run on fewer draws than this.
pub const MIN_ORACLE_DRAWS: usize = 100_000;

/// Oracles refuse to report from fewer accepted draws than this.
pub const MIN_ACCEPTED: usize = 1000;

/// Draw one SNR from the prior.
pub fn draw_snr<R: Rng + ?Sized>(p: &SnrPrior, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let weights = p.weights();
    let mut k = weights.len() - 1;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            k = i;
            break;
        }
    }
    let e: f64 = rng.sample(StandardNormal);
    p.taus()[k] * e
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f(rng, count)` over `n` draws split into seeded chunks and
/// concatenates the outputs in chunk order.
fn chunked<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let count = CHUNK.min(n - i * CHUNK);
            f(&mut chunk_rng(seed, i), count)
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Distribution of standard errors for simulated trials.
#[derive(Debug, Clone, PartialEq)]
pub enum SDistSpec {
    Fixed(f64),
    /// `ln s ~ N(mu, sigma²)`.
    LogNormal { mu: f64, sigma: f64 },
    /// Uniform over the listed values.
    Empirical(Vec<f64>),
}

impl SDistSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        match self {
            SDistSpec::Fixed(s) if !(s.is_finite() && *s > 0.0) => bad(format!("fixed s must be > 0, got {s}")),
            SDistSpec::LogNormal { mu, sigma } if !(mu.is_finite() && sigma.is_finite() && *sigma >= 0.0) => {
                bad(format!("invalid lognormal parameters ({mu}, {sigma})"))
            }
            SDistSpec::Empirical(v) if v.is_empty() => bad("empirical s list is empty".into()),
            SDistSpec::Empirical(v) if v.iter().any(|s| !(s.is_finite() && *s > 0.0)) => {
                bad("empirical s values must be finite and > 0".into())
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SDistSpec::Fixed(s) => *s,
            SDistSpec::LogNormal { mu, sigma } => {
                let e: f64 = rng.sample(StandardNormal);
                (mu + sigma * e).exp()
            }
            SDistSpec::Empirical(v) => v[rng.random_range(0..v.len())],
        }
    }
}

impl FromStr for SDistSpec {
    type Err = Error;

    /// `fixed:S`, `lognormal:MU,SIGMA` or `list:S1,S2,...`.
    fn from_str(text: &str) -> Result<Self> {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("s-distribution '{text}' is not of the form kind:params")))?;
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number '{a}' in s-distribution")))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = match (kind.trim(), nums.as_slice()) {
            ("fixed", [s]) => SDistSpec::Fixed(*s),
            ("lognormal", [mu, sigma]) => SDistSpec::LogNormal { mu: *mu, sigma: *sigma },
            ("list", v) => SDistSpec::Empirical(v.to_vec()),
            _ => return Err(Error::invalid(format!("unrecognized s-distribution '{text}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Simulates `n` trials: s from `sspec`, SNR from the prior, β = s·SNR and
/// b ~ N(β, s²). Only (b, s) are kept.
pub fn sample_trials(p: &SnrPrior, sspec: &SDistSpec, n: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    sspec.validate()?;
    if n == 0 {
        return Err(Error::invalid("number of trials must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let s = sspec.draw(&mut rng);
            let beta = s * draw_snr(p, &mut rng);
            let noise: f64 = rng.sample(StandardNormal);
            TrialRecord::new(format!("sim{}", i + 1), beta + s * noise, s)
        })
        .collect()
}

/// `n` draws of z = SNR + N(0, 1).
pub fn sample_z(p: &SnrPrior, n: usize, seed: u64) -> Vec<f64> {
    chunked(n, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                draw_snr(p, rng) + e
            })
            .collect()
    })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

impl McEstimate {
    /// Distance to `x` in standard errors.
    pub fn z_score(&self, x: f64) -> f64 {
        (self.value - x).abs() / self.se
    }

    pub fn agrees_with(&self, x: f64, n_se: f64) -> bool {
        self.z_score(x) <= n_se
    }
}

pub fn mean_estimate(values: &[f64]) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    McEstimate { value: mean, se: (var / n).sqrt() }
}

/// Sample quantile with the asymptotic standard error
/// `sqrt(p(1−p)/n) / f(q)`, where `1/f(q)` is estimated from the spacing
/// of order statistics around the quantile.
pub fn quantile_estimate(values: &[f64], prob: f64) -> McEstimate {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let at = |q: f64| {
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        sorted[idx]
    };
    let h = (n as f64).powf(-1.0 / 3.0).min(prob).min(1.0 - prob) * 0.5;
    let spacing = at(prob + h) - at(prob - h);
    let inv_density = spacing / (2.0 * h);
    McEstimate {
        value: at(prob),
        se: (prob * (1.0 - prob) / n as f64).sqrt() * inv_density,
    }
}

pub fn probability_estimate(hits: usize, n: usize) -> McEstimate {
    let p = hits as f64 / n as f64;
    McEstimate { value: p, se: (p * (1.0 - p) / n as f64).sqrt() }
}

/// SNR draws accepted because their z landed within `band` of `z0`.
#[derive(Debug, Clone)]
pub struct ConditionalSample {
    pub z0: f64,
    pub band: f64,
    pub n_draws: usize,
    pub snr: Vec<f64>,
}

impl ConditionalSample {
    pub fn accepted(&self) -> usize {
        self.snr.len()
    }

    /// E(SNR | z0).
    pub fn mean(&self) -> McEstimate {
        mean_estimate(&self.snr)
    }

    /// Quantile of SNR | z0.
    pub fn quantile(&self, prob: f64) -> McEstimate {
        quantile_estimate(&self.snr, prob)
    }

    /// P(pred(SNR) | z0).
    pub fn probability(&self, pred: impl Fn(f64) -> bool) -> McEstimate {
        probability_estimate(self.snr.iter().filter(|&&x| pred(x)).count(), self.snr.len())
    }

    /// Quantile of `numerator / |SNR|` given z0.
    pub fn ratio_quantile(&self, numerator: f64, prob: f64) -> McEstimate {
        let ratios: Vec<f64> = self.snr.iter().map(|s| numerator / s.abs()).collect();
        quantile_estimate(&ratios, prob)
    }
}

/// Rejection-sampling estimate of the SNR distribution given z = z0: draw
/// (SNR, z) pairs from the prior-plus-noise model and keep those with
/// `|z − z0| <= band`.
pub fn mc_posterior_oracle(p: &SnrPrior, z0: f64, n: usize, seed: u64, band: f64) -> Result<ConditionalSample> {
    ensure_finite(z0, "z0")?;
    if !(band > 0.0 && band.is_finite()) {
        return Err(Error::invalid(format!("band must be positive, got {band}")));
    }
    if n < MIN_ORACLE_DRAWS {
        return Err(Error::invalid(format!("oracle needs at least {MIN_ORACLE_DRAWS} draws, got {n}")));
    }
    let snr = chunked(n, seed, |rng, count| {
        let mut kept = Vec::new();
        for _ in 0..count {
            let snr = draw_snr(p, rng);
            let e: f64 = rng.sample(StandardNormal);
            if (snr + e - z0).abs() <= band {
                kept.push(snr);
            }
        }
        kept
    });
    if snr.len() < MIN_ACCEPTED {
        return Err(Error::InsufficientAcceptances { accepted: snr.len(), required: MIN_ACCEPTED });
    }
    Ok(ConditionalSample { z0, band, n_draws: n, snr })
}

/// Simulates X ~ N(|SNR|, 1), keeps |X| > crit, and averages |X| / |SNR|.
pub fn mc_exaggeration_oracle(abs_snr: f64, crit: f64, n: usize, seed: u64) -> Result<McEstimate> {
    if !(abs_snr > 0.0 && abs_snr.is_finite()) {
        return Err(Error::invalid(format!("|SNR| must be > 0, got {abs_snr}")));
    }
    check_crit(crit)?;
    if n < MIN_ORACLE_DRAWS {
        return Err(Error::invalid(format!("oracle needs at least {MIN_ORACLE_DRAWS} draws, got {n}")));
    }
    let ratios = chunked(n, seed, |rng, count| {
        let mut kept = Vec::new();
        for _ in 0..count {
            let e: f64 = rng.sample(StandardNormal);
            let x = (abs_snr + e).abs();
            if x > crit {
                kept.push(x / abs_snr);
            }
        }
        kept
    });
    if ratios.len() < MIN_ACCEPTED {
        return Err(Error::InsufficientAcceptances { accepted: ratios.len(), required: MIN_ACCEPTED });
    }
    Ok(mean_estimate(&ratios))
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
