//! Minimize the kernel-regression objective over a tau-net and compare the
//! returned decision with the true conditional optimum.

use nwopt::{make_newsvendor, sample_dataset, solve_nw, ConditionalOracle, GeneratorSpec};

fn main() -> nwopt::Result<()> {
    let gen = GeneratorSpec::default();
    let problem = make_newsvendor(1, 2.0, 1.0, gen)?; // underage twice as costly
    let data = sample_dataset(&gen, 8000, 3)?;

    let query = [0.6];
    let h = 0.12;
    let tau = 0.01;

    let result = solve_nw(&data, &problem.spec, &query, h, tau)?;
    let (x_star, value_star) = problem.oracle.true_optimum(&query);
    let achieved = problem.oracle.conditional_mean_loss(&result.x_hat, &query);

    println!("net size:            {}", result.net_size);
    println!("data-driven x_hat:   {:?}", result.x_hat);
    println!("estimated objective: {:.6}", result.objective_value);
    println!("true optimum x*:     {x_star:?}");
    println!("true value at x_hat: {achieved:.6}");
    println!("true value at x*:    {value_star:.6}");
    println!("suboptimality gap:   {:.6}", achieved - value_star);
    Ok(())
}
