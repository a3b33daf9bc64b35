//! Everything the prior says about one trial: shrinkage estimate, an
//! interval with 95% coverage given z, the coverage of the usual interval,
//! and the likely exaggeration of the reported estimate.
//!
//! ```bash
//! cargo run --example shrink_trial -- 0.5 0.25
//! ```

use snr_prior::prelude::*;

fn main() -> Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (b, s) = match args[..] {
        [b, s] => (b, s),
        _ => (0.5, 0.25),
    };
    let prior = reference::snr_prior();
    let z = b / s;
    let ci = credible_interval(&prior, b, s, 0.95)?;
    println!("b = {b}, s = {s}, z = {z:.3}");
    println!("usual 95% interval      ({:.3}, {:.3})", b - 1.96 * s, b + 1.96 * s);
    println!("  its coverage given z  {:.3}", conditional_coverage(&prior, z)?);
    println!("shrinkage estimate      {:.4}", shrink_estimate(&prior, b, s)?);
    println!("interval given z        ({:.3}, {:.3})", ci.lo, ci.hi);
    if z != 0.0 {
        for (name, e) in [("|b|/|beta|", RatioEstimator::Raw), ("|shrunk|/|beta|", RatioEstimator::Shrunk)] {
            let q = ratio_quartiles_given_z(&prior, z, e)?;
            println!("{name:<16} quartiles {:.3} {:.3} {:.3}", q.q25, q.q50, q.q75);
        }
    }
    Ok(())
}
