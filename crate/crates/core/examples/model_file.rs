//! Save a prior as a versioned JSON model file and load it again.
//!
//! ```bash
//! cargo run --example model_file
//! ```

use snr_prior::io::{model_to_string, read_model, write_model, MixtureModel, ModelFile, Provenance};
use snr_prior::prelude::*;

fn main() -> Result<()> {
    let file = ModelFile {
        model: MixtureModel::Z(reference::z_mixture()),
        provenance: Provenance { note: Some("reference mixture".into()), ..Provenance::default() },
    };
    print!("{}", model_to_string(&file)?);

    let path = std::env::temp_dir().join("snr-prior-reference.json");
    write_model(&file, &path)?;
    let back = read_model(&path)?;
    println!("read back identical: {}", back == file);
    Ok(())
}
