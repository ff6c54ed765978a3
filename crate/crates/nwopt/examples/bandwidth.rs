//! The bandwidth that balances the bias and deviation contributions, and
//! its exact power-law scaling in the sample size.

use nwopt::{optimal_bandwidth, BoundParams, CoveringMode};

fn main() -> nwopt::Result<()> {
    let params = BoundParams::new(
        0.05,               // delta
        0.05,               // tau
        CoveringMode::Ball, // covering bound for the net size
        1.0,                // L_x
        0.4,                // L_gamma
        1.0,                // density floor
        1.0,                // diameter
        1,                  // decision dim
        1,                  // covariate dim
    )?;

    println!("n        h(n)");
    for k in 8..=16 {
        let n = 1usize << k;
        println!("{n:<8} {:.6}", optimal_bandwidth(n, &params)?);
    }

    let ratio = optimal_bandwidth(2000, &params)? / optimal_bandwidth(1000, &params)?;
    println!(
        "h(2n)/h(n) = {ratio:.12} = 2^(-1/(p+2)) = {:.12}",
        2f64.powf(-1.0 / 3.0)
    );
    Ok(())
}
