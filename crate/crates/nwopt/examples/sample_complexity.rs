//! How many samples suffice for a target suboptimality gap, and how the
//! requirement explodes with the covariate dimension.

use nwopt::{sample_complexity, BoundParams, CoveringMode};

fn params(p: usize) -> nwopt::Result<BoundParams> {
    BoundParams::new(0.05, 0.1, CoveringMode::Ball, 1.0, 1.0, 1.0, 1.0, 1, p)
}

fn main() -> nwopt::Result<()> {
    println!("samples sufficient for gap eps with probability 0.95 (p=1):");
    for eps in [0.4, 0.3, 0.2, 0.1] {
        println!("  eps = {eps}: n >= {}", sample_complexity(eps, 0.05, &params(1)?)?);
    }

    println!("\ncurse of dimensionality at eps = 0.2:");
    for p in 1..=4usize {
        println!("  p = {p}: n >= {}", sample_complexity(0.2, 0.05, &params(p)?)?);
    }
    Ok(())
}
