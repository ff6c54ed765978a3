//! Monte Carlo verification harness.
//!
//! Each experiment repeatedly samples a fresh dataset from a synthetic
//! problem, runs the estimator (or the net optimizer) against the known
//! ground truth, and compares the observed failure frequencies with the
//! closed-form bounds. Trials are independent tasks over a worker pool;
//! per-trial seeds derive from `(base_seed, trial_index)` through a
//! counter-based split, and aggregation is order-independent, so a report
//! is bitwise identical for any worker count.
//!
//! Statistical assertions never compare a single empirical frequency
//! against a probability pointwise. A run passes when the one-sided 99%
//! exact binomial (Clopper-Pearson) test cannot reject that the true
//! violation rate is within the theoretical bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::estimator::{neighbors, nw_estimate_with_neighbors, surrogate_with_neighbors};
use crate::optimizer::{build_tau_net, solve_nw_on_net};
use crate::problems::{sample_dataset, ConditionalOracle, SyntheticProblem};
use crate::theory::{
    ball_volume_constant, generalization_failure_prob, optimal_bandwidth, suboptimality_bound,
};
use crate::types::{BoundParams, CoveringMode};

/// Slack allowed on deterministic inequalities evaluated in f64.
pub const FLOAT_SLACK: f64 = 1e-12;

/// Confidence level for the exact binomial interval on violation rates.
pub const BINOMIAL_CONFIDENCE: f64 = 0.99;

/// Derives an independent per-trial seed from the base seed and trial
/// index (SplitMix64 finalizer over a Weyl sequence).
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(trial_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One-sided upper Clopper-Pearson confidence limit for `k` successes in
/// `n` Bernoulli trials.
pub fn clopper_pearson_upper(k: usize, n: usize, confidence: f64) -> f64 {
    assert!(n > 0 && k <= n);
    if k == n {
        return 1.0;
    }
    Beta::new((k + 1) as f64, (n - k) as f64)
        .expect("valid beta shapes")
        .inverse_cdf(confidence)
}

/// One-sided lower Clopper-Pearson confidence limit.
pub fn clopper_pearson_lower(k: usize, n: usize, confidence: f64) -> f64 {
    assert!(n > 0 && k <= n);
    if k == 0 {
        return 0.0;
    }
    Beta::new(k as f64, (n - k + 1) as f64)
        .expect("valid beta shapes")
        .inverse_cdf(1.0 - confidence)
}

/// Per-trial measurements. `abs_error`, `bias_component` and
/// `mad_component` refer to a single (decision, query) pair; `gap` is only
/// present for end-to-end optimizer trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub n: usize,
    pub abs_error: f64,
    pub bias_component: f64,
    pub mad_component: f64,
    pub neighbor_count: usize,
    pub gap: Option<f64>,
    pub bound_violated: bool,
}

/// Sample size, balanced bandwidth, and mean error for one grid point of a
/// convergence-rate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub bandwidth: f64,
    pub mean_abs_error: f64,
}

/// Aggregate outcome of an experiment, including every per-trial record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Echo of the resolved configuration, including the problem constants.
    pub config: serde_json::Value,
    pub empirical_violation_rate: f64,
    /// Clamped theoretical ceiling on the violation rate.
    pub theoretical_bound: f64,
    /// Same bound before clamping to [0, 1]; values above 1 are vacuous.
    pub theoretical_bound_raw: f64,
    /// Formula that produced `theoretical_bound`.
    pub bound_formula: String,
    /// One-sided 99% Clopper-Pearson upper limit on the violation rate.
    pub binomial_upper_conf: f64,
    /// One-sided 99% Clopper-Pearson lower limit; the exact test rejects
    /// the bound only when this exceeds it.
    pub binomial_lower_conf: f64,
    pub empty_neighborhood_rate: f64,
    pub fitted_rate_slope: Option<f64>,
    pub slope_target: Option<f64>,
    pub slope_window: Option<f64>,
    pub rate_points: Vec<RatePoint>,
    pub records: Vec<TrialRecord>,
}

/// Outcome of one statistical assertion over a finished report.
#[derive(Debug, Clone, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ExperimentReport {
    fn base(experiment: &str, config: serde_json::Value, records: Vec<TrialRecord>) -> Self {
        let trials = records.len();
        let violations = records.iter().filter(|r| r.bound_violated).count();
        let empties = records.iter().filter(|r| r.neighbor_count == 0).count();
        ExperimentReport {
            experiment: experiment.to_string(),
            config,
            empirical_violation_rate: violations as f64 / trials as f64,
            theoretical_bound: 0.0,
            theoretical_bound_raw: 0.0,
            bound_formula: String::new(),
            binomial_upper_conf: clopper_pearson_upper(violations, trials, BINOMIAL_CONFIDENCE),
            binomial_lower_conf: clopper_pearson_lower(violations, trials, BINOMIAL_CONFIDENCE),
            empty_neighborhood_rate: empties as f64 / trials as f64,
            fitted_rate_slope: None,
            slope_target: None,
            slope_window: None,
            rate_points: Vec::new(),
            records,
        }
    }

    /// Evaluates every statistical assertion attached to this experiment
    /// kind. The report as a whole passes when all of them do.
    pub fn assertions(&self) -> Vec<AssertionResult> {
        let mut out = Vec::new();

        let triangle_violations = self
            .records
            .iter()
            .filter(|r| r.abs_error > r.bias_component + r.mad_component + FLOAT_SLACK)
            .count();
        out.push(AssertionResult {
            name: "triangle_inequality".into(),
            passed: triangle_violations == 0,
            detail: format!(
                "abs_error <= bias + mad (+{FLOAT_SLACK:.0e}) violated in {triangle_violations}/{} trials",
                self.records.len()
            ),
        });

        match self.experiment.as_str() {
            "bias_mad" => {
                let k = self.records.iter().filter(|r| r.bound_violated).count();
                out.push(AssertionResult {
                    name: "bias_bound_deterministic".into(),
                    passed: k == 0,
                    detail: format!(
                        "bias_component <= L_gamma*h (+1 on empty neighborhood) violated in {k}/{} trials",
                        self.records.len()
                    ),
                });
            }
            _ => {
                // the exact one-sided binomial test at 99%: reject only if
                // even the lower confidence limit exceeds the bound
                let passed = self.empirical_violation_rate <= self.theoretical_bound
                    || self.binomial_lower_conf <= self.theoretical_bound;
                out.push(AssertionResult {
                    name: "violation_rate_within_bound".into(),
                    passed,
                    detail: format!(
                        "empirical {:.6} vs bound {:.6} (99% CP lower {:.6}, upper {:.6})",
                        self.empirical_violation_rate,
                        self.theoretical_bound,
                        self.binomial_lower_conf,
                        self.binomial_upper_conf
                    ),
                });
            }
        }

        if self.experiment == "rate" {
            let (passed, detail) = match (self.fitted_rate_slope, self.slope_target, self.slope_window)
            {
                (Some(slope), Some(target), Some(window)) => (
                    (slope - target).abs() <= window,
                    format!("fitted slope {slope:.4} vs target {target:.4} +- {window}"),
                ),
                _ => (false, "slope could not be fitted".to_string()),
            };
            out.push(AssertionResult {
                name: "rate_slope_within_window".into(),
                passed,
                detail,
            });
            let oversized = self.records.iter().filter(|r| r.abs_error > 1.0).count();
            out.push(AssertionResult {
                name: "errors_bounded_by_one".into(),
                passed: oversized == 0,
                detail: format!("{oversized} trials with abs_error > 1"),
            });
        }

        if self.experiment == "suboptimality" {
            let negative = self
                .records
                .iter()
                .filter(|r| r.gap.map(|g| g < -FLOAT_SLACK).unwrap_or(true))
                .count();
            out.push(AssertionResult {
                name: "gaps_nonnegative".into(),
                passed: negative == 0,
                detail: format!("{negative} trials with gap below -{FLOAT_SLACK:.0e}"),
            });
        }

        out
    }

    pub fn all_assertions_pass(&self) -> bool {
        self.assertions().iter().all(|a| a.passed)
    }
}

/// Fixed-decision coverage experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub x_fixed: Vec<f64>,
    pub gamma_query: Vec<f64>,
    pub n: usize,
    pub h: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub base_seed: u64,
}

/// Convergence-rate experiment configuration. The bandwidth at each grid
/// point is the balanced bandwidth for that sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub x_fixed: Vec<f64>,
    pub gamma_query: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub base_seed: u64,
    pub delta: f64,
    pub tau: f64,
    pub covering: CoveringMode,
    /// Acceptance half-width around the target slope `-1/(p+2)`; sized for
    /// 200 trials per grid point.
    pub slope_window: f64,
}

/// End-to-end optimizer experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalityConfig {
    pub gamma_query: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub delta: f64,
    pub tau: f64,
    pub covering: CoveringMode,
}

fn check_query_inputs(problem: &SyntheticProblem, x: &[f64], gamma_query: &[f64]) -> Result<()> {
    if !problem.spec.feasible.contains(x) {
        return Err(Error::invalid_parameter(
            "x_fixed",
            format!("{x:?} lies outside the feasible box"),
        ));
    }
    if gamma_query.len() != problem.spec.covariate_dim() {
        return Err(Error::DimensionMismatch {
            context: "gamma query",
            expected: problem.spec.covariate_dim(),
            actual: gamma_query.len(),
        });
    }
    Ok(())
}

struct PointTrial {
    abs_error: f64,
    bias: f64,
    mad: f64,
    neighbor_count: usize,
}

/// Samples a fresh dataset and measures the estimator error at one
/// (decision, query) pair, split into its bias and deviation parts.
fn run_point_trial(
    problem: &SyntheticProblem,
    x: &[f64],
    gamma_query: &[f64],
    n: usize,
    h: f64,
    seed: u64,
) -> Result<PointTrial> {
    let data = sample_dataset(&problem.generator, n, seed)?;
    let hood = neighbors(&data, gamma_query, h)?;
    let estimate = nw_estimate_with_neighbors(&data, &problem.spec.loss, x, &hood);
    let surrogate = surrogate_with_neighbors(&data, &problem.oracle, x, &hood);
    let truth = problem.oracle.conditional_mean_loss(x, gamma_query);
    Ok(PointTrial {
        abs_error: (truth - estimate.value).abs(),
        bias: (truth - surrogate.value).abs(),
        mad: (surrogate.value - estimate.value).abs(),
        neighbor_count: hood.count(),
    })
}

fn config_echo<C: Serialize>(problem: &SyntheticProblem, cfg: &C) -> Result<serde_json::Value> {
    Ok(serde_json::json!({
        "problem": problem.describe(),
        "run": serde_json::to_value(cfg)?,
    }))
}

/// Verifies the fixed-decision deviation bound: the fraction of trials
/// with `|E - E_hat| > L_gamma h + epsilon` is compared against
/// `min(1, 2 exp(-n c f h^p eps^2 / 2))`.
///
/// Empty-neighborhood trials stay in the statistics (the estimator is 0
/// there by definition); their frequency is reported separately.
pub fn run_coverage(problem: &SyntheticProblem, cfg: &CoverageConfig) -> Result<ExperimentReport> {
    check_query_inputs(problem, &cfg.x_fixed, &cfg.gamma_query)?;
    if cfg.trials < 100 {
        return Err(Error::invalid_parameter(
            "trials",
            format!("need at least 100 for stable rates, got {}", cfg.trials),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(Error::EpsilonOutOfRange(cfg.epsilon));
    }

    let lipschitz_gamma = problem.spec.loss.lipschitz_gamma();
    let threshold = lipschitz_gamma * cfg.h + cfg.epsilon;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, t as u64);
            let trial =
                run_point_trial(problem, &cfg.x_fixed, &cfg.gamma_query, cfg.n, cfg.h, seed)?;
            Ok(TrialRecord {
                trial_index: t,
                seed,
                n: cfg.n,
                abs_error: trial.abs_error,
                bias_component: trial.bias,
                mad_component: trial.mad,
                neighbor_count: trial.neighbor_count,
                gap: None,
                bound_violated: trial.abs_error > threshold,
            })
        })
        .collect::<Result<_>>()?;

    let failure = generalization_failure_prob(
        cfg.n,
        problem.spec.covariate_dim(),
        cfg.h,
        cfg.epsilon,
        problem.spec.density_floor(),
    )?;
    let mut report = ExperimentReport::base("coverage", config_echo(problem, cfg)?, records);
    report.theoretical_bound = failure.clamped;
    report.theoretical_bound_raw = failure.raw;
    report.bound_formula = "min(1, 2*exp(-n*c*f*h^p*eps^2/2))".into();
    Ok(report)
}

/// Verifies the deterministic half of the error decomposition: with a
/// nonempty neighborhood the bias part can never exceed `L_gamma * h`,
/// and on an empty neighborhood it is at most 1.
pub fn run_bias_mad(problem: &SyntheticProblem, cfg: &CoverageConfig) -> Result<ExperimentReport> {
    check_query_inputs(problem, &cfg.x_fixed, &cfg.gamma_query)?;
    if cfg.trials < 100 {
        return Err(Error::invalid_parameter(
            "trials",
            format!("need at least 100 for stable rates, got {}", cfg.trials),
        ));
    }

    let bias_cap = problem.spec.loss.lipschitz_gamma() * cfg.h;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, t as u64);
            let trial =
                run_point_trial(problem, &cfg.x_fixed, &cfg.gamma_query, cfg.n, cfg.h, seed)?;
            let cap = if trial.neighbor_count == 0 {
                bias_cap + 1.0
            } else {
                bias_cap
            };
            Ok(TrialRecord {
                trial_index: t,
                seed,
                n: cfg.n,
                abs_error: trial.abs_error,
                bias_component: trial.bias,
                mad_component: trial.mad,
                neighbor_count: trial.neighbor_count,
                gap: None,
                bound_violated: trial.bias > cap + FLOAT_SLACK,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::base("bias_mad", config_echo(problem, cfg)?, records);
    report.theoretical_bound = 0.0;
    report.theoretical_bound_raw = 0.0;
    report.bound_formula =
        "deterministic: bias <= L_gamma*h + 1{empty neighborhood}".into();
    Ok(report)
}

/// Measures how the mean estimator error shrinks when each sample size in
/// the grid uses its balanced bandwidth, and fits the log-log slope.
///
/// Violations are tracked against the fixed-decision bound with the
/// deviation level matched to overall failure probability `delta` at each
/// grid point: `eps_n = min(1, sqrt(2 ln(2/delta) / (n c f h^p)))`.
pub fn run_rate(problem: &SyntheticProblem, cfg: &RateConfig) -> Result<ExperimentReport> {
    check_query_inputs(problem, &cfg.x_fixed, &cfg.gamma_query)?;
    if cfg.n_grid.is_empty() {
        return Err(Error::invalid_parameter("n_grid", "must be non-empty"));
    }
    if cfg.trials_per_n == 0 {
        return Err(Error::invalid_parameter("trials_per_n", "must be >= 1"));
    }
    let params = BoundParams::from_problem(&problem.spec, cfg.delta, cfg.tau, cfg.covering)?;
    let p = problem.spec.covariate_dim();
    let c = ball_volume_constant(p);
    let f_floor = problem.spec.density_floor();
    let lipschitz_gamma = problem.spec.loss.lipschitz_gamma();

    let mut bandwidths = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        bandwidths.push(optimal_bandwidth(n, &params)?);
    }

    let trials_total = cfg.n_grid.len() * cfg.trials_per_n;
    let records: Vec<TrialRecord> = (0..trials_total)
        .into_par_iter()
        .map(|global| {
            let grid_idx = global / cfg.trials_per_n;
            let n = cfg.n_grid[grid_idx];
            let h = bandwidths[grid_idx];
            let seed = trial_seed(cfg.base_seed, global as u64);
            let trial = run_point_trial(problem, &cfg.x_fixed, &cfg.gamma_query, n, h, seed)?;
            let eps_n = (2.0 * (2.0 / cfg.delta).ln()
                / (n as f64 * c * f_floor * h.powi(p as i32)))
            .sqrt()
            .min(1.0);
            Ok(TrialRecord {
                trial_index: global,
                seed,
                n,
                abs_error: trial.abs_error,
                bias_component: trial.bias,
                mad_component: trial.mad,
                neighbor_count: trial.neighbor_count,
                gap: None,
                bound_violated: trial.abs_error > lipschitz_gamma * h + eps_n,
            })
        })
        .collect::<Result<_>>()?;

    let mut rate_points = Vec::with_capacity(cfg.n_grid.len());
    for (grid_idx, &n) in cfg.n_grid.iter().enumerate() {
        let lo = grid_idx * cfg.trials_per_n;
        let hi = lo + cfg.trials_per_n;
        let mean = records[lo..hi].iter().map(|r| r.abs_error).sum::<f64>()
            / cfg.trials_per_n as f64;
        rate_points.push(RatePoint {
            n,
            bandwidth: bandwidths[grid_idx],
            mean_abs_error: mean,
        });
    }
    let slope = fit_log_log_slope(
        &rate_points
            .iter()
            .map(|pt| (pt.n as f64, pt.mean_abs_error))
            .collect::<Vec<_>>(),
    );

    let mut report = ExperimentReport::base("rate", config_echo(problem, cfg)?, records);
    report.theoretical_bound = cfg.delta;
    report.theoretical_bound_raw = cfg.delta;
    report.bound_formula =
        "per-trial deviation matched to delta: eps_n = min(1, sqrt(2 ln(2/delta)/(n c f h^p)))"
            .into();
    report.fitted_rate_slope = slope;
    report.slope_target = Some(-1.0 / (p as f64 + 2.0));
    report.slope_window = Some(cfg.slope_window);
    report.rate_points = rate_points;
    Ok(report)
}

/// End-to-end check of the suboptimality certificate: solve the net
/// problem on a fresh dataset, compare the true conditional loss of the
/// returned decision with the true optimum, and count how often the gap
/// exceeds the bound (certified to happen with probability at most
/// `delta`).
pub fn run_suboptimality(
    problem: &SyntheticProblem,
    cfg: &SuboptimalityConfig,
) -> Result<ExperimentReport> {
    if cfg.gamma_query.len() != problem.spec.covariate_dim() {
        return Err(Error::DimensionMismatch {
            context: "gamma query",
            expected: problem.spec.covariate_dim(),
            actual: cfg.gamma_query.len(),
        });
    }
    if cfg.trials == 0 {
        return Err(Error::invalid_parameter("trials", "must be >= 1"));
    }
    let params = BoundParams::from_problem(&problem.spec, cfg.delta, cfg.tau, cfg.covering)?;
    let bound = suboptimality_bound(cfg.n, &params)?;
    let h = bound.optimal_bandwidth;
    let net = build_tau_net(&problem.spec.feasible, cfg.tau)?;
    let (_, optimum_value) = problem.oracle.true_optimum(&cfg.gamma_query);

    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, t as u64);
            let data = sample_dataset(&problem.generator, cfg.n, seed)?;
            let solution = solve_nw_on_net(&data, &problem.spec, &cfg.gamma_query, h, &net)?;
            let gap = problem
                .oracle
                .conditional_mean_loss(&solution.x_hat, &cfg.gamma_query)
                - optimum_value;

            // estimator error decomposition at the returned decision
            let hood = neighbors(&data, &cfg.gamma_query, h)?;
            let estimate =
                nw_estimate_with_neighbors(&data, &problem.spec.loss, &solution.x_hat, &hood);
            let surrogate =
                surrogate_with_neighbors(&data, &problem.oracle, &solution.x_hat, &hood);
            let truth = problem
                .oracle
                .conditional_mean_loss(&solution.x_hat, &cfg.gamma_query);
            Ok(TrialRecord {
                trial_index: t,
                seed,
                n: cfg.n,
                abs_error: (truth - estimate.value).abs(),
                bias_component: (truth - surrogate.value).abs(),
                mad_component: (surrogate.value - estimate.value).abs(),
                neighbor_count: hood.count(),
                gap: Some(gap),
                bound_violated: gap > bound.total,
            })
        })
        .collect::<Result<_>>()?;

    let mut report =
        ExperimentReport::base("suboptimality", config_echo(problem, cfg)?, records);
    report.theoretical_bound = cfg.delta;
    report.theoretical_bound_raw = cfg.delta;
    report.bound_formula = format!(
        "P(gap > {} ) <= delta, with gap bound = statistical {} + discretization {} at h = {}",
        bound.total, bound.statistical_term, bound.discretization_term, h
    );
    Ok(report)
}

/// Least-squares slope of `log(y)` against `log(x)`. Returns `None` when
/// any mean error is non-positive (log undefined) or fewer than two
/// points are available.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in logs {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    (den > 0.0).then(|| num / den)
}

/// Runs a closure inside a dedicated worker pool of the given size, or on
/// the global pool when `workers` is `None`.
pub fn with_worker_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid_parameter("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
