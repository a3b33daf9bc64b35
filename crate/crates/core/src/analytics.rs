//! Population summaries under an SNR prior: achieved power, the
//! exaggeration ratio of significant results, and the quantile table tying
//! them together.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::model::{NormalMixture, SnrPrior};
use crate::numeric::{integrate, invert_nondecreasing, std_normal_cdf, std_normal_pdf};
use crate::sim::draw_snr;

/// Two-sided 5% critical value of the Wald test.
pub const DEFAULT_CRIT: f64 = 1.96;

/// Probabilities reported by default in [`SummaryTable`].
pub const DEFAULT_PROBS: [f64; 5] = [0.10, 0.25, 0.50, 0.75, 0.90];

/// Power of the two-sided 5% Wald test of β = 0 at a given SNR.
pub fn power(snr: f64) -> f64 {
    power_at(snr, DEFAULT_CRIT)
}

/// `Φ(−c − snr) + 1 − Φ(c − snr)`.
pub fn power_at(snr: f64, crit: f64) -> f64 {
    std_normal_cdf(-crit - snr) + std_normal_cdf(snr - crit)
}

/// |SNR| at which the 5% test has power `pw`.
pub fn power_inverse(pw: f64) -> Result<f64> {
    power_inverse_at(pw, DEFAULT_CRIT)
}

pub fn power_inverse_at(pw: f64, crit: f64) -> Result<f64> {
    let size = power_at(0.0, crit);
    if !(pw > size && pw < 1.0) {
        return Err(Error::invalid(format!("power must lie in ({size}, 1), got {pw}")));
    }
    let mut hi = crit + 10.0;
    while power_at(hi, crit) < pw {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid(format!("power {pw} too close to 1 to invert")));
        }
    }
    Ok(invert_nondecreasing(|x| power_at(x, crit), pw, 0.0, hi))
}

/// Expected exaggeration `E(|b|/|β| | |z| > crit)` as a function of |SNR|.
pub fn exaggeration_given_sig(abs_snr: f64) -> Result<f64> {
    exaggeration_given_sig_at(abs_snr, DEFAULT_CRIT)
}

/// With X ~ N(θ, 1):
/// `E(X; X > c) = θ(1 − Φ(c − θ)) + φ(c − θ)` and, mirrored,
/// `E(−X; X < −c) = −θ(1 − Φ(c + θ)) + φ(c + θ)`, normalized by the power.
pub fn exaggeration_given_sig_at(abs_snr: f64, crit: f64) -> Result<f64> {
    if !(abs_snr > 0.0 && abs_snr.is_finite()) {
        return Err(Error::invalid(format!(
            "exaggeration needs a finite |SNR| > 0, got {abs_snr}"
        )));
    }
    let t = abs_snr;
    let upper = t * std_normal_cdf(t - crit) + std_normal_pdf(crit - t);
    let lower = -t * std_normal_cdf(-crit - t) + std_normal_pdf(crit + t);
    Ok((upper + lower) / power_at(t, crit) / t)
}

/// Average power over the prior, by adaptive quadrature of the power
/// function against the prior density plus the point-mass contributions.
pub fn mean_power(p: &SnrPrior) -> f64 {
    mean_power_at(p, DEFAULT_CRIT)
}

pub fn mean_power_at(p: &SnrPrior, crit: f64) -> f64 {
    let size = power_at(0.0, crit);
    let atoms: f64 = p.components().filter(|c| c.sd == 0.0).map(|c| c.weight * size).sum();
    let max_tau = p.max_tau();
    if max_tau == 0.0 {
        return atoms;
    }
    let limit = 12.0 * max_tau;
    // power is even, integrate one side and double
    let body = integrate(|x| power_at(x, crit) * p.density(x), 0.0, limit, 5e-8, 4000).value;
    // beyond the limit power is 1 to within 1e-30
    let tails: f64 = p
        .components()
        .filter(|c| c.sd > 0.0)
        .map(|c| c.weight * 2.0 * std_normal_cdf(-limit / c.sd))
        .sum();
    atoms + 2.0 * body + tails
}

/// P(power(SNR) <= t) under the prior.
pub fn power_cdf_at(p: &SnrPrior, t: f64) -> Result<f64> {
    p.abs_cdf(power_inverse(t)?)
}

/// Quantiles of |SNR| with the power and exaggeration at those |SNR|
/// values. Both maps are monotone, so the power row is also the power
/// quantiles; the exaggeration row is the exaggeration function evaluated
/// column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub probabilities: Vec<f64>,
    pub snr_abs_quantiles: Vec<f64>,
    pub power_at_quantiles: Vec<f64>,
    pub exaggeration_at_quantiles: Vec<f64>,
    pub mean_power: f64,
    pub frac_power_below_080: f64,
}

pub fn summary_table(p: &SnrPrior, ps: &[f64]) -> Result<SummaryTable> {
    if ps.is_empty() {
        return Err(Error::invalid("summary table needs at least one probability"));
    }
    if ps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("summary probabilities must be strictly increasing"));
    }
    let snr = ps.iter().map(|&q| p.abs_quantile(q)).collect::<Result<Vec<_>>>()?;
    let pw = snr.iter().map(|&x| power(x)).collect();
    // exaggeration diverges at |SNR| = 0 (point-mass priors)
    let ex = snr
        .iter()
        .map(|&x| if x > 0.0 { exaggeration_given_sig(x) } else { Ok(f64::INFINITY) })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryTable {
        probabilities: ps.to_vec(),
        snr_abs_quantiles: snr,
        power_at_quantiles: pw,
        exaggeration_at_quantiles: ex,
        mean_power: mean_power(p),
        frac_power_below_080: power_cdf_at(p, 0.80)?,
    })
}

/// `n` seeded draws of the achieved power across trials.
pub fn power_sample(p: &SnrPrior, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("power sample size must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| power(draw_snr(p, &mut rng))).collect())
}

pub(crate) fn check_crit(crit: f64) -> Result<()> {
    ensure_finite(crit, "critical value")?;
    if crit <= 0.0 {
        return Err(Error::invalid(format!("critical value must be positive, got {crit}")));
    }
    Ok(())
}
