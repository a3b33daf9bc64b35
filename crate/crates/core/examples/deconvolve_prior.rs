//! Turn a fitted z-value mixture into a prior for the SNR by removing the
//! unit noise variance from each component.
//!
//! ```bash
//! cargo run --example deconvolve_prior
//! ```

use snr_prior::prelude::*;

fn main() -> Result<()> {
    let z = reference::z_mixture();
    let d = deconvolve(&z, 0.0)?;
    println!("{:>8} {:>8} {:>8}", "weight", "sigma", "tau");
    for ((w, s), t) in z.weights().iter().zip(z.sigmas()).zip(d.prior.taus()) {
        println!("{w:>8.2} {s:>8.2} {t:>8.3}");
    }

    // A component narrower than the noise gets clamped to a point mass.
    let narrow = ZMixture::new(vec![0.6, 0.4], vec![0.9, 2.0])?;
    let d = deconvolve(&narrow, 0.0)?;
    for w in &d.warnings {
        println!("warning: {w}");
    }
    println!("taus after clamping: {:?}", d.prior.taus());
    println!("convolved back: {:?}", convolve(&d.prior).sigmas());
    Ok(())
}
