//! Convergence-rate experiment: mean estimator error against sample size
//! under the balanced bandwidth schedule, with the fitted log-log slope.

use nwopt::experiments::{run_rate, RateConfig};
use nwopt::types::CoveringMode;
use nwopt::{make_newsvendor, GeneratorSpec};

fn main() -> nwopt::Result<()> {
    let gen = GeneratorSpec::new(1, 0.3, 0.4, 0.3)?;
    let problem = make_newsvendor(1, 1.0, 1.0, gen)?;
    let cfg = RateConfig {
        x_fixed: vec![0.95],
        gamma_query: vec![0.5],
        n_grid: vec![256, 512, 1024, 2048, 4096, 8192, 16384],
        trials_per_n: 200,
        base_seed: 1234,
        delta: 0.05,
        tau: 0.05,
        covering: CoveringMode::Ball,
        slope_window: 0.12,
    };
    let report = run_rate(&problem, &cfg)?;

    println!("n        h(n)      mean_abs_error");
    for pt in &report.rate_points {
        println!("{:<8} {:.6}  {:.6}", pt.n, pt.bandwidth, pt.mean_abs_error);
    }
    println!(
        "fitted slope {:.4}, expected -1/(p+2) = {:.4}",
        report.fitted_rate_slope.unwrap(),
        report.slope_target.unwrap()
    );
    for a in report.assertions() {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    Ok(())
}
