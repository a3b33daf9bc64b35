//! Write every curve table (power, exaggeration, ratio quartiles, coverage,
//! power histogram) plus a symmetrized z histogram with the fitted density.
//!
//! ```bash
//! cargo run --release --example figure_curves -- /tmp/curves
//! ```

use snr_prior::io::{emit_curves, emit_histogram, CurveGrid, HistogramSpec};
use snr_prior::prelude::*;
use snr_prior::sim::sample_z;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snr-prior-curves"));
    let prior = reference::snr_prior();
    for path in emit_curves(&prior, &CurveGrid::default(), &dir)? {
        println!("wrote {}", path.display());
    }

    let zs = sample_z(&prior, 23_747, 3);
    let hist = dir.join("z_histogram.csv");
    emit_histogram(&zs, &HistogramSpec::default(), true, &convolve(&prior), &hist)?;
    println!("wrote {}", hist.display());
    Ok(())
}
