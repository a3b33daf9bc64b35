//! How much a significant estimate overstates the true effect, as a
//! function of the SNR, checked against brute-force simulation.
//!
//! ```bash
//! cargo run --release --example exaggeration
//! ```

use snr_prior::prelude::*;

fn main() -> Result<()> {
    println!("{:>6} {:>7} {:>13} {:>10} {:>8}", "|SNR|", "power", "exaggeration", "simulated", "se");
    for (i, snr) in [0.2, 0.5, 0.84, 1.5, 2.8, 4.0].into_iter().enumerate() {
        let exact = exaggeration_given_sig(snr)?;
        let mc = mc_exaggeration_oracle(snr, DEFAULT_CRIT, 2_000_000, i as u64)?;
        println!(
            "{snr:>6.2} {:>7.3} {exact:>13.3} {:>10.3} {:>8.4}",
            power(snr),
            mc.value,
            mc.se
        );
    }
    Ok(())
}
