//! Synthesize a dataset, export it to the canonical CSV format, and read
//! it back losslessly.

use nwopt::cli::{read_dataset_from_path, write_dataset_to_path};
use nwopt::{sample_dataset, GeneratorSpec};

fn main() -> nwopt::Result<()> {
    let gen = GeneratorSpec {
        covariate_dim: 2,
        ..GeneratorSpec::default()
    };
    let data = sample_dataset(&gen, 1000, 11)?;

    let dir = std::env::temp_dir().join("nwopt_example");
    let path = dir.join("dataset.csv");
    write_dataset_to_path(&data, &path)?;
    println!("wrote {} rows to {}", data.n(), path.display());

    let back = read_dataset_from_path(&path)?;
    assert_eq!(back, data, "round trip must be bitwise lossless");
    println!(
        "read back n={}, p={}, q={}; first row gamma={:?} xi={:?}",
        back.n(),
        back.covariate_dim(),
        back.outcome_dim(),
        back.covariate(0),
        back.outcome(0)
    );
    Ok(())
}
