//! Closed-form finite-sample bounds: the deviation probability of the
//! estimate at a fixed decision, and the suboptimality certificate for the
//! net-optimized decision.

use nwopt::theory::generalization_bound;
use nwopt::{ball_probability_floor, suboptimality_bound, BoundParams, CoveringMode};

fn main() -> nwopt::Result<()> {
    // fixed-decision deviation bound at n=1000, h=0.1, eps=0.5
    let bound = generalization_bound(1000, 1, 0.1, 0.5, 1.0, 1.0)?;
    println!("error threshold L_gamma*h + eps = {}", bound.bias_term + bound.deviation_term);
    println!(
        "failure probability: raw {:.3e}, clamped {:.3e}",
        bound.failure_probability.raw, bound.failure_probability.clamped
    );
    println!(
        "ball-probability floor at h=0.1: {}",
        ball_probability_floor(1, 0.1, 1.0)
    );

    // the same bound with eps = 0 is vacuous; the raw value shows by how much
    let vacuous = generalization_bound(1000, 1, 0.1, 0.0, 1.0, 1.0)?;
    println!(
        "eps=0 bound: raw {}, clamped {}",
        vacuous.failure_probability.raw, vacuous.failure_probability.clamped
    );

    // end-to-end certificate for the net-optimized decision
    let params = BoundParams::new(0.1, 0.02, CoveringMode::Ball, 1.0, 0.4, 1.0, 1.0, 1, 1)?;
    println!("\nn        h(n)      statistical  discretization  total");
    for n in [1000usize, 4000, 16000, 64000] {
        let sub = suboptimality_bound(n, &params)?;
        println!(
            "{n:<8} {:.6}  {:.6}     {:.6}        {:.6}",
            sub.optimal_bandwidth, sub.statistical_term, sub.discretization_term, sub.total
        );
    }
    Ok(())
}
