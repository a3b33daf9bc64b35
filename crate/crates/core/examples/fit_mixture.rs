//! Fit zero-mean normal mixtures to simulated z-values and pick the number
//! of components by BIC.
//!
//! ```bash
//! cargo run --release --example fit_mixture
//! ```

use std::time::Instant;

use snr_prior::prelude::*;
use snr_prior::sim::sample_z;

fn main() -> Result<()> {
    let truth = reference::z_mixture();
    let prior = deconvolve(&truth, 0.0)?.prior;
    let zs = sample_z(&prior, 23_747, 1);

    let cfg = EmConfig { seed: 1, ..EmConfig::default() };
    let start = Instant::now();
    let (fit, diag) = fit_em(&zs, 4, &cfg)?;
    println!("K = 4 fit in {:.2?}", start.elapsed());
    println!("  weights {:?}", fit.weights());
    println!("  sigmas  {:?}", fit.sigmas());
    println!(
        "  loglik {:.3}, BIC {:.3}, {} iterations, converged {}, best restart {}",
        diag.loglik, diag.bic, diag.n_iter, diag.converged, diag.restart_index
    );

    let start = Instant::now();
    let sel = select_components(&zs, 1..=6, &cfg)?;
    println!("BIC selection over 1..=6 in {:.2?}", start.elapsed());
    for (k, bic) in &sel.bic_by_k {
        println!("  K = {k}: BIC {bic:.2}");
    }
    println!("chosen K = {}", sel.chosen_k);
    Ok(())
}
