//! Empirical-Bayes analysis of trial z-values.
//!
//! A trial reports an estimate `b` with standard error `s`; its z-value
//! `b/s` is the signal-to-noise ratio `β/s` plus standard normal noise.
//! Fitting a zero-mean normal mixture to many z-values and subtracting the
//! unit noise variance from every component gives a prior on the SNR, and
//! from that prior follow:
//!
//! - the distribution of achieved power ([`analytics::power`],
//!   [`analytics::summary_table`]),
//! - the exaggeration of significant estimates
//!   ([`analytics::exaggeration_given_sig`],
//!   [`posterior::ratio_quartiles_given_z`]),
//! - the conditional coverage of the usual 95% interval
//!   ([`posterior::conditional_coverage`]),
//! - a shrinkage estimate with an interval calibrated given z
//!   ([`posterior::shrink_estimate`], [`posterior::credible_interval`]).
//!
//! ```
//! use snr_prior::prelude::*;
//!
//! let prior = deconvolve(&reference::z_mixture(), 0.0).unwrap().prior;
//! let shrunk = shrink_estimate(&prior, 0.5, 0.25).unwrap();
//! assert!(shrunk.abs() < 0.5);
//! ```
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory; the `snr-prior` binary wraps the whole pipeline.

pub mod analytics;
pub mod cli;
pub mod deconv;
pub mod em;
pub mod error;
pub mod io;
pub mod model;
pub mod numeric;
pub mod posterior;
pub mod sim;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytics::{
        exaggeration_given_sig, mean_power, power, power_cdf_at, power_inverse, power_sample, summary_table,
        SummaryTable, DEFAULT_CRIT, DEFAULT_PROBS,
    };
    pub use crate::deconv::{convolve, deconvolve, ClampWarning, Deconvolution};
    pub use crate::em::{fit_em, select_components, EmConfig, FitDiagnostics, Selection};
    pub use crate::error::{Error, Result};
    pub use crate::model::{reference, NormalMixture, PosteriorSnr, SnrPrior, TrialRecord, ZMixture};
    pub use crate::posterior::{
        conditional_coverage, credible_interval, posterior_mean, posterior_snr, ratio_quartiles_given_z,
        shrink_estimate, Interval, RatioEstimator, RatioQuartiles,
    };
    pub use crate::sim::{mc_exaggeration_oracle, mc_posterior_oracle, sample_trials, SDistSpec};
}
