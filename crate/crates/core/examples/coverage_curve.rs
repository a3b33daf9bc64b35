//! Coverage of the usual 95% interval among trials with a given z-value,
//! with a rejection-sampling check at a few points.
//!
//! ```bash
//! cargo run --release --example coverage_curve
//! ```

use snr_prior::prelude::*;

fn main() -> Result<()> {
    let prior = reference::snr_prior();
    println!("{:>5} {:>9} {:>10} {:>7}", "z", "coverage", "simulated", "se");
    for (i, z) in [0.0, 1.0, 1.96, 2.5, 3.0, 4.0, 5.0].into_iter().enumerate() {
        let exact = conditional_coverage(&prior, z)?;
        let sample = mc_posterior_oracle(&prior, z, 4_000_000, i as u64, 0.05)?;
        let mc = sample.probability(|snr| (snr - z).abs() < DEFAULT_CRIT);
        println!("{z:>5.2} {exact:>9.4} {:>10.4} {:>7.4}", mc.value, mc.se);
    }
    Ok(())
}
