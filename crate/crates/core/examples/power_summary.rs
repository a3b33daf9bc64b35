//! Distribution of achieved power implied by the reference prior.
//!
//! ```bash
//! cargo run --example power_summary
//! ```

use snr_prior::prelude::*;

fn main() -> Result<()> {
    let prior = reference::snr_prior();
    let t = summary_table(&prior, &DEFAULT_PROBS)?;
    let row = |xs: &[f64]| xs.iter().map(|x| format!("{x:>8.3}")).collect::<String>();
    println!("{:<14}{}", "probability", row(&t.probabilities));
    println!("{:<14}{}", "|SNR|", row(&t.snr_abs_quantiles));
    println!("{:<14}{}", "power", row(&t.power_at_quantiles));
    println!("{:<14}{}", "exaggeration", row(&t.exaggeration_at_quantiles));
    println!("average power {:.3}", mean_power(&prior));

    for target in [0.5, 0.8, 0.9] {
        println!(
            "P(power < {target}) = {:.3}   (|SNR| needed: {:.3})",
            power_cdf_at(&prior, target)?,
            power_inverse(target)?
        );
    }
    Ok(())
}
