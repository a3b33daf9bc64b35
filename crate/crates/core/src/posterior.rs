//! The SNR conditional on an observed z-value, and the trial-level
//! quantities derived from it: the shrinkage estimate, a calibrated
//! interval, the conditional coverage of the usual interval, and the
//! distribution of the exaggeration ratio.
//!
//! Under a zero-mean normal prior component with sd τ, z | SNR ~ N(SNR, 1)
//! gives SNR | z ~ N(z·τ²/(τ²+1), τ²/(τ²+1)), and the component weight is
//! updated by the marginal density of z, N(0, τ²+1). Mixing over
//! components gives [`PosteriorSnr`].

use crate::analytics::DEFAULT_CRIT;
use crate::error::{ensure_finite, Error, Result};
use crate::model::{check_probability, NormalMixture, PosteriorSnr, SnrPrior};
use crate::numeric::{log_sum_exp, normal_ln_pdf};

pub fn posterior_snr(p: &SnrPrior, z: f64) -> Result<PosteriorSnr> {
    ensure_finite(z, "z")?;
    let k = p.n_components();
    let mut log_weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut sds = Vec::with_capacity(k);
    for (&w, &tau) in p.weights().iter().zip(p.taus()) {
        let var_z = tau * tau + 1.0;
        let shrink = tau * tau / var_z;
        log_weights.push(if w > 0.0 { w.ln() + normal_ln_pdf(z, var_z.sqrt()) } else { f64::NEG_INFINITY });
        means.push(z * shrink);
        sds.push(shrink.sqrt());
    }
    let norm = log_sum_exp(&log_weights);
    let weights = log_weights.iter().map(|l| (l - norm).exp()).collect();
    Ok(PosteriorSnr::from_parts(z, weights, means, sds))
}

/// E(SNR | z).
pub fn posterior_mean(p: &SnrPrior, z: f64) -> Result<f64> {
    Ok(posterior_snr(p, z)?.mean())
}

fn check_se(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("standard error must be positive and finite, got {s}")))
    }
}

/// Shrinkage estimate of the effect, `s · E(SNR | b/s)`.
pub fn shrink_estimate(p: &SnrPrior, b: f64, s: f64) -> Result<f64> {
    check_se(s)?;
    ensure_finite(b, "b")?;
    Ok(s * posterior_mean(p, b / s)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Equal-tailed interval for β with conditional coverage `level` given z,
/// i.e. posterior SNR quantiles scaled by s.
pub fn credible_interval(p: &SnrPrior, b: f64, s: f64, level: f64) -> Result<Interval> {
    check_se(s)?;
    ensure_finite(b, "b")?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("interval level must lie in (0, 1), got {level}")));
    }
    let z = b / s;
    // Work with |z| and mirror, so the interval for -b is exactly the
    // negation of the interval for b.
    let post = posterior_snr(p, z.abs())?;
    let tail = 0.5 * (1.0 - level);
    let lo = s * post.quantile(tail)?;
    let hi = s * post.quantile(1.0 - tail)?;
    Ok(if z < 0.0 { Interval { lo: -hi, hi: -lo } } else { Interval { lo, hi } })
}

/// P(z − 1.96 < SNR < z + 1.96 | z): how often the usual 95% interval
/// covers the true effect among trials with this z-value.
pub fn conditional_coverage(p: &SnrPrior, z: f64) -> Result<f64> {
    conditional_coverage_at(p, z, DEFAULT_CRIT)
}

pub fn conditional_coverage_at(p: &SnrPrior, z: f64, crit: f64) -> Result<f64> {
    ensure_finite(z, "z")?;
    let z = z.abs();
    let post = posterior_snr(p, z)?;
    // Open interval: drop any atom sitting exactly on the lower endpoint.
    let lower = z - crit;
    let below = post.cdf(lower);
    Ok((post.cdf(z + crit) - below).clamp(0.0, 1.0))
}

/// Numerator of the ratio whose distribution given z is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioEstimator {
    /// `|b| / |β| = |z| / |SNR|`.
    Raw,
    /// `|β̂| / |β| = |E(SNR | z)| / |SNR|`.
    Shrunk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioQuartiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

/// Quantile `prob` of the ratio given z. With numerator a > 0,
/// P(a/|SNR| <= r | z) = P(|SNR| >= a/r | z), so the ratio quantile is
/// `a / q_{1-prob}(|SNR| | z)`. Mass at SNR = 0 maps to an infinite ratio.
pub fn ratio_quantile_given_z(p: &SnrPrior, z: f64, estimator: RatioEstimator, prob: f64) -> Result<f64> {
    ensure_finite(z, "z")?;
    check_probability(prob)?;
    if z == 0.0 {
        return Err(Error::invalid("the ratio distribution is degenerate at z = 0"));
    }
    let post = posterior_snr(p, z)?;
    let numerator = match estimator {
        RatioEstimator::Raw => z.abs(),
        RatioEstimator::Shrunk => post.mean().abs(),
    };
    let snr_q = post.abs_quantile(1.0 - prob)?;
    Ok(if snr_q > 0.0 { numerator / snr_q } else { f64::INFINITY })
}

pub fn ratio_quartiles_given_z(p: &SnrPrior, z: f64, estimator: RatioEstimator) -> Result<RatioQuartiles> {
    Ok(RatioQuartiles {
        q25: ratio_quantile_given_z(p, z, estimator, 0.25)?,
        q50: ratio_quantile_given_z(p, z, estimator, 0.50)?,
        q75: ratio_quantile_given_z(p, z, estimator, 0.75)?,
    })
}
