//! Monte Carlo check of the fixed-decision deviation bound: how often does
//! the estimator miss the truth by more than L_gamma*h + eps?

use nwopt::experiments::{run_coverage, CoverageConfig};
use nwopt::{make_newsvendor, GeneratorSpec};

fn main() -> nwopt::Result<()> {
    let problem = make_newsvendor(1, 1.0, 1.0, GeneratorSpec::default())?;
    let cfg = CoverageConfig {
        x_fixed: vec![0.5],
        gamma_query: vec![0.5],
        n: 2000,
        h: 0.15,
        epsilon: 0.3,
        trials: 1000,
        base_seed: 42,
    };
    let report = run_coverage(&problem, &cfg)?;

    let max_err = report.records.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    println!("trials:                    {}", report.records.len());
    println!("violation threshold:       {}", 0.4 * cfg.h + cfg.epsilon);
    println!("largest observed error:    {max_err:.5}");
    println!("empirical violation rate:  {}", report.empirical_violation_rate);
    println!("theoretical bound:         {:.3e}", report.theoretical_bound);
    println!("99% CP upper bound:        {:.5}", report.binomial_upper_conf);
    println!("empty-neighborhood rate:   {}", report.empty_neighborhood_rate);
    for a in report.assertions() {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    Ok(())
}
