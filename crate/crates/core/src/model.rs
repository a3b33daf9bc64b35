//! Trials and the three normal-mixture types everything else is built on.
//!
//! [`ZMixture`] describes the z-value `b/s`, [`SnrPrior`] the signal-to-noise
//! ratio `β/s`, and [`PosteriorSnr`] the SNR conditional on one observed z.
//! All three share density, distribution and quantile evaluation through
//! [`NormalMixture`].

use libm::erf;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{invert_nondecreasing, std_normal_cdf, std_normal_pdf};

/// Tolerance on the weight sum accepted (and renormalized) at construction.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// One trial: an effect estimate and its standard error.
///
/// The true effect β is never observed, so it is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    id: String,
    b: f64,
    s: f64,
}

impl TrialRecord {
    pub fn new(id: impl Into<String>, b: f64, s: f64) -> Result<Self> {
        ensure_finite(b, "effect estimate b")?;
        ensure_finite(s, "standard error s")?;
        if s <= 0.0 {
            return Err(Error::invalid(format!("standard error must be positive, got {s}")));
        }
        Ok(Self { id: id.into(), b, s })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// The z-value `b / s`.
    pub fn z(&self) -> f64 {
        self.b / self.s
    }
}

/// A single normal component. `sd == 0` is a point mass at `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

impl Component {
    fn cdf(&self, x: f64) -> f64 {
        if self.sd == 0.0 {
            if x >= self.mean {
                1.0
            } else {
                0.0
            }
        } else {
            std_normal_cdf((x - self.mean) / self.sd)
        }
    }

    /// P(|X| <= x) for x >= 0.
    fn abs_cdf(&self, x: f64) -> f64 {
        if self.sd == 0.0 {
            return if self.mean.abs() <= x { 1.0 } else { 0.0 };
        }
        if self.mean == 0.0 {
            erf(x / (self.sd * std::f64::consts::SQRT_2))
        } else {
            std_normal_cdf((x - self.mean) / self.sd) - std_normal_cdf((-x - self.mean) / self.sd)
        }
    }
}

/// Finite mixture of normal components with exact density, distribution and
/// quantile evaluation.
///
/// Point-mass components (`sd == 0`) contribute a jump to the distribution
/// function and nothing to the density.
pub trait NormalMixture {
    fn components(&self) -> impl Iterator<Item = Component> + '_;

    fn n_components(&self) -> usize {
        self.components().count()
    }

    /// Density at `x`. Rejects non-finite `x`.
    fn pdf(&self, x: f64) -> Result<f64> {
        ensure_finite(x, "x")?;
        Ok(self.density(x))
    }

    /// Density without argument checks.
    fn density(&self, x: f64) -> f64 {
        self.components()
            .filter(|c| c.sd > 0.0)
            .map(|c| c.weight * std_normal_pdf((x - c.mean) / c.sd) / c.sd)
            .sum()
    }

    /// P(X <= x). Defined for ±∞ as 0 and 1.
    fn cdf(&self, x: f64) -> f64 {
        let v: f64 = self.components().map(|c| c.weight * c.cdf(x)).sum();
        v.clamp(0.0, 1.0)
    }

    fn mean(&self) -> f64 {
        self.components().map(|c| c.weight * c.mean).sum()
    }

    /// Half-width of an interval guaranteed to contain all but a
    /// negligible tail of every component.
    fn bracket_radius(&self) -> f64 {
        let max_sd = self.components().map(|c| c.sd).fold(0.0, f64::max);
        let max_mean = self.components().map(|c| c.mean.abs()).fold(0.0, f64::max);
        max_mean + 12.0 * max_sd + 1.0
    }

    /// The smallest x with `cdf(x) >= p`.
    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let r = self.bracket_radius();
        Ok(invert_nondecreasing(|x| self.cdf(x), p, -r, r))
    }

    /// P(|X| <= x) for x >= 0.
    fn abs_cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::invalid(format!("abs_cdf needs x >= 0, got {x}")));
        }
        let v: f64 = self.components().map(|c| c.weight * c.abs_cdf(x)).sum();
        Ok(v.clamp(0.0, 1.0))
    }

    /// Quantile of |X|.
    fn abs_quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let r = self.bracket_radius();
        Ok(invert_nondecreasing(
            |x| self.components().map(|c| c.weight * c.abs_cdf(x)).sum(),
            p,
            0.0,
            r,
        ))
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Validates weights and standard deviations, renormalizes the weights and
/// sorts both into canonical (ascending sd) order.
fn canonical_parts(mut weights: Vec<f64>, mut sds: Vec<f64>, allow_zero_sd: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    if weights.is_empty() {
        return Err(Error::invalid("a mixture needs at least one component"));
    }
    if weights.len() != sds.len() {
        return Err(Error::invalid(format!(
            "{} weights but {} standard deviations",
            weights.len(),
            sds.len()
        )));
    }
    for &w in &weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!("mixture weights must be finite and >= 0, got {w}")));
        }
    }
    for &sd in &sds {
        let ok = sd.is_finite() && if allow_zero_sd { sd >= 0.0 } else { sd > 0.0 };
        if !ok {
            return Err(Error::invalid(format!("invalid component standard deviation {sd}")));
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
    }
    if (total - 1.0).abs() > 1e-12 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| sds[i].total_cmp(&sds[j]).then(weights[i].total_cmp(&weights[j])));
    if order.windows(2).any(|w| w[0] > w[1]) {
        weights = order.iter().map(|&i| weights[i]).collect();
        sds = order.iter().map(|&i| sds[i]).collect();
    }
    Ok((weights, sds))
}

/// Zero-mean normal mixture for the z-value.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMixture {
    weights: Vec<f64>,
    sigmas: Vec<f64>,
}

impl ZMixture {
    pub fn new(weights: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        let (weights, sigmas) = canonical_parts(weights, sigmas, false)?;
        Ok(Self { weights, sigmas })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Second moment `Σ w_k σ_k²`.
    pub fn variance(&self) -> f64 {
        self.weights.iter().zip(&self.sigmas).map(|(w, s)| w * s * s).sum()
    }
}

impl NormalMixture for ZMixture {
    fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.weights.iter().zip(&self.sigmas).map(|(&weight, &sd)| Component { weight, mean: 0.0, sd })
    }
}

/// Zero-mean normal mixture for the signal-to-noise ratio. Components with
/// `tau == 0` are point masses at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrPrior {
    weights: Vec<f64>,
    taus: Vec<f64>,
}

impl SnrPrior {
    pub fn new(weights: Vec<f64>, taus: Vec<f64>) -> Result<Self> {
        let (weights, taus) = canonical_parts(weights, taus, true)?;
        Ok(Self { weights, taus })
    }

    /// All mass at SNR = 0.
    pub fn point_mass() -> Self {
        Self { weights: vec![1.0], taus: vec![0.0] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn max_tau(&self) -> f64 {
        self.taus.iter().copied().fold(0.0, f64::max)
    }
}

impl NormalMixture for SnrPrior {
    fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.weights.iter().zip(&self.taus).map(|(&weight, &sd)| Component { weight, mean: 0.0, sd })
    }
}

/// Distribution of the SNR given one observed z: a normal mixture whose
/// weights and means depend on z.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSnr {
    z: f64,
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl PosteriorSnr {
    pub(crate) fn from_parts(z: f64, weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64>) -> Self {
        debug_assert!(weights.len() == means.len() && means.len() == sds.len());
        Self { z, weights, means, sds }
    }

    /// The conditioning z-value.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }
}

impl NormalMixture for PosteriorSnr {
    fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((&weight, &mean), &sd)| Component { weight, mean, sd })
    }
}

/// Published four-component fit to 23,747 trials from the Cochrane Database
/// of Systematic Reviews, as rounded to two decimals.
pub mod reference {
    use super::{SnrPrior, ZMixture};

    pub const WEIGHTS: [f64; 4] = [0.32, 0.31, 0.30, 0.07];
    pub const Z_SIGMAS: [f64; 4] = [1.19, 1.71, 2.40, 5.65];
    pub const SNR_TAUS: [f64; 4] = [0.64, 1.38, 2.18, 5.56];

    /// The z-value mixture.
    pub fn z_mixture() -> ZMixture {
        ZMixture::new(WEIGHTS.to_vec(), Z_SIGMAS.to_vec()).expect("reference mixture is valid")
    }

    /// The SNR prior with the published (rounded) component sds.
    pub fn snr_prior() -> SnrPrior {
        SnrPrior::new(WEIGHTS.to_vec(), SNR_TAUS.to_vec()).expect("reference prior is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> ZMixture {
        ZMixture::new(vec![1.0], vec![1.0]).unwrap()
    }

    #[test]
    fn trial_z_is_b_over_s() {
        let t = TrialRecord::new("t1", 0.5, 0.25).unwrap();
        assert_eq!(t.z(), 2.0);
        assert!(TrialRecord::new("t2", 0.5, 0.0).is_err());
        assert!(TrialRecord::new("t3", f64::NAN, 1.0).is_err());
    }

    #[test]
    fn single_component_density_and_cdf() {
        let m = std_normal();
        assert!((m.pdf(0.0).unwrap() - 0.398942).abs() < 1e-6);
        assert!((m.cdf(1.96) - 0.975).abs() < 1e-4);
        assert!((m.quantile(0.975).unwrap() - 1.96).abs() < 1e-3);
        assert!((m.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-6);
        assert!(m.pdf(f64::INFINITY).is_err());
        assert_eq!(m.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(m.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn reference_mixture_density_matches_term_by_term_sum() {
        // independent oracle: direct four-term sum with the textbook density
        let oracle: f64 = reference::WEIGHTS
            .iter()
            .zip(reference::Z_SIGMAS)
            .map(|(w, s)| w / (s * (2.0 * std::f64::consts::PI).sqrt()))
            .sum();
        let m = reference::z_mixture();
        assert!((m.pdf(0.0).unwrap() - oracle).abs() < 1e-14);
        assert!((m.pdf(1.7).unwrap() - m.pdf(-1.7).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn symmetric_mixture_centre() {
        let m = reference::z_mixture();
        assert_eq!(m.cdf(0.0), 0.5);
        assert!(m.quantile(0.5).unwrap().abs() < 1e-8);
    }

    #[test]
    fn reference_prior_abs_quantiles() {
        let p = reference::snr_prior();
        assert!((p.cdf(0.84) - 0.75).abs() < 0.005);
        assert!((p.abs_quantile(0.5).unwrap() - 0.84).abs() < 0.02);
        assert!((p.abs_quantile(0.9).unwrap() - 3.01).abs() < 0.02);
        assert_eq!(p.abs_cdf(0.0).unwrap(), 0.0);
        assert!(p.abs_cdf(-0.1).is_err());
        let x = 1.3;
        assert!((p.abs_cdf(x).unwrap() - (2.0 * p.cdf(x) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn quantile_rejects_bad_probabilities() {
        let m = std_normal();
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(m.quantile(p), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn construction_sorts_and_renormalizes() {
        let m = ZMixture::new(vec![0.7, 0.3 + 5e-10], vec![3.0, 1.5]).unwrap();
        assert_eq!(m.sigmas(), &[1.5, 3.0]);
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((m.weights()[1] - 0.7).abs() < 1e-9);
        assert!(ZMixture::new(vec![0.7, 0.2], vec![1.0, 2.0]).is_err());
        assert!(ZMixture::new(vec![1.0], vec![0.0]).is_err());
        assert!(ZMixture::new(vec![0.5], vec![1.0, 2.0]).is_err());
        assert!(ZMixture::new(vec![], vec![]).is_err());
        assert!(SnrPrior::new(vec![1.5, -0.5], vec![1.0, 2.0]).is_err());
        assert!(SnrPrior::new(vec![1.0], vec![0.0]).is_ok());
    }

    #[test]
    fn point_mass_has_jump_and_no_density() {
        let p = SnrPrior::new(vec![0.5, 0.5], vec![0.0, 1.0]).unwrap();
        assert!((p.cdf(0.0) - 0.75).abs() < 1e-15);
        assert!((p.cdf(-1e-12) - 0.25).abs() < 1e-10);
        assert!((p.pdf(0.0).unwrap() - 0.5 * 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(p.quantile(0.5).unwrap(), 0.0);
        assert_eq!(p.abs_quantile(0.3).unwrap(), 0.0);
        assert!((p.abs_cdf(0.0).unwrap() - 0.5).abs() < 1e-15);
    }
}
