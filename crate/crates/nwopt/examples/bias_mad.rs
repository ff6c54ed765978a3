//! Split the estimator error into its bias and deviation parts. The bias
//! part obeys a deterministic inequality whenever the neighborhood is
//! nonempty; the deviation part shrinks with the effective sample count.

use nwopt::experiments::{run_bias_mad, CoverageConfig};
use nwopt::{make_newsvendor, GeneratorSpec};

fn main() -> nwopt::Result<()> {
    let problem = make_newsvendor(1, 1.0, 1.0, GeneratorSpec::default())?;
    let h = 0.15;
    let cap = problem.spec.loss.lipschitz_gamma() * h;

    println!("bias cap L_gamma*h = {cap}");
    println!("n      mean_bias  max_bias   mean_mad   mean_abs_error");
    for n in [500usize, 2000, 8000] {
        let cfg = CoverageConfig {
            x_fixed: vec![0.5],
            gamma_query: vec![0.5],
            n,
            h,
            epsilon: 0.0,
            trials: 1000,
            base_seed: 9,
        };
        let report = run_bias_mad(&problem, &cfg)?;
        let count = report.records.len() as f64;
        let mean_bias = report.records.iter().map(|r| r.bias_component).sum::<f64>() / count;
        let max_bias = report.records.iter().map(|r| r.bias_component).fold(0.0, f64::max);
        let mean_mad = report.records.iter().map(|r| r.mad_component).sum::<f64>() / count;
        let mean_err = report.records.iter().map(|r| r.abs_error).sum::<f64>() / count;
        println!("{n:<6} {mean_bias:.6}   {max_bias:.6}   {mean_mad:.6}   {mean_err:.6}");
        assert!(report.all_assertions_pass());
    }
    println!("the bias column never exceeds the cap; the deviation column");
    println!("shrinks as n grows with the bandwidth held fixed");
    Ok(())
}
