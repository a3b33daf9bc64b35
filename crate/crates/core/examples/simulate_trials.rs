//! Simulate a trial file from a prior, read it back through the ingest
//! path and refit.
//!
//! ```bash
//! cargo run --release --example simulate_trials
//! ```

use snr_prior::io::{read_trials, write_trials};
use snr_prior::prelude::*;

fn main() -> Result<()> {
    let prior = reference::snr_prior();
    let spec: SDistSpec = "lognormal:-1.5,0.7".parse()?;
    let trials = sample_trials(&prior, &spec, 5_000, 7)?;
    let dir = std::env::temp_dir().join("snr-prior-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("trials.csv");
    write_trials(&trials, &path)?;

    let (read, report) = read_trials(&path)?;
    println!("wrote and read {} trials ({} rejected) at {}", read.len(), report.n_rejected, path.display());
    let zs: Vec<f64> = read.iter().map(|t| t.z()).collect();
    let (fit, diag) = fit_em(&zs, 3, &EmConfig { restarts: 4, ..EmConfig::default() })?;
    println!("3-component fit: weights {:.3?}", fit.weights());
    println!("                 sigmas  {:.3?}", fit.sigmas());
    println!("                 loglik {:.2}, converged {}", diag.loglik, diag.converged);
    Ok(())
}
