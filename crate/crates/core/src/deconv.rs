//! Moving between the z-value mixture and the SNR prior.
//!
//! z is the SNR plus independent standard normal noise, so each zero-mean
//! component just gains or loses one unit of variance.

use crate::error::{Error, Result};
use crate::model::{SnrPrior, ZMixture};

/// A z-component whose variance did not exceed the unit noise variance and
/// whose SNR variance was clamped to the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampWarning {
    pub component: usize,
    pub sigma: f64,
    pub clamped_tau: f64,
}

impl std::fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "component {} has z sd {} <= 1; SNR sd clamped to {}",
            self.component, self.sigma, self.clamped_tau
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deconvolution {
    pub prior: SnrPrior,
    pub warnings: Vec<ClampWarning>,
}

/// `τ_k = sqrt(max(σ_k² − 1, floor))`, weights untouched.
pub fn deconvolve(m: &ZMixture, floor: f64) -> Result<Deconvolution> {
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(Error::invalid(format!("variance floor must be finite and >= 0, got {floor}")));
    }
    let mut warnings = Vec::new();
    let taus = m
        .sigmas()
        .iter()
        .enumerate()
        .map(|(k, &sigma)| {
            let excess = sigma * sigma - 1.0;
            if excess > floor {
                excess.sqrt()
            } else {
                let tau = floor.sqrt();
                if excess < floor {
                    warnings.push(ClampWarning { component: k, sigma, clamped_tau: tau });
                }
                tau
            }
        })
        .collect();
    let prior = SnrPrior::new(m.weights().to_vec(), taus)?;
    Ok(Deconvolution { prior, warnings })
}

/// `σ_k = sqrt(τ_k² + 1)`, weights untouched.
pub fn convolve(p: &SnrPrior) -> ZMixture {
    let sigmas = p.taus().iter().map(|t| (t * t + 1.0).sqrt()).collect();
    ZMixture::new(p.weights().to_vec(), sigmas).expect("adding unit variance keeps a valid mixture")
}
