//! Closed-form finite-sample bounds: deviation probabilities for the
//! kernel estimate at a fixed decision, the bandwidth that balances the
//! bias and deviation terms, the resulting suboptimality bound for the
//! net-optimized decision, and the sample-complexity calculator.
//!
//! Probabilities are clamped to [0, 1] after evaluation; the raw value is
//! kept alongside because an un-clamped bound above 1 is vacuous but still
//! useful in diagnostics and plots. All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BoundParams, CoveringMode};

/// Volume of the unit Euclidean ball in `R^p`.
///
/// Computed by the two-step recurrence `V_p = V_{p-2} * 2*pi / p` starting
/// from `V_0 = 1`, `V_1 = 2`, which is exact for integer dimensions.
pub fn ball_volume_constant(p: usize) -> f64 {
    assert!(p >= 1, "dimension must be >= 1");
    let mut values = [1.0, 2.0]; // V_0, V_1
    for k in 2..=p {
        let next = values[0] * 2.0 * std::f64::consts::PI / k as f64;
        values[0] = values[1];
        values[1] = next;
    }
    values[1]
}

/// Lower bound `min(1, c * f_floor * h^p)` on the probability that a fresh
/// covariate sample lands in the radius-`h` ball around the query.
pub fn ball_probability_floor(p: usize, h: f64, density_floor: f64) -> f64 {
    assert!(h >= 0.0 && density_floor > 0.0);
    (ball_volume_constant(p) * density_floor * h.powi(p as i32)).min(1.0)
}

/// A probability-valued bound before and after clamping to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureProbability {
    pub raw: f64,
    pub clamped: f64,
}

impl FailureProbability {
    fn from_raw(raw: f64) -> Self {
        FailureProbability {
            raw,
            clamped: raw.min(1.0),
        }
    }
}

/// Probability that the kernel estimate at a fixed decision misses the
/// true conditional expectation by more than `L_gamma * h + epsilon`:
/// `min(1, 2 exp(-n c f h^p eps^2 / 2))`.
///
/// `epsilon` must lie in [0, 1]; the inequality behind the bound is only
/// valid on that range, so values outside it are an error rather than a
/// silent extension.
pub fn generalization_failure_prob(
    n: usize,
    p: usize,
    h: f64,
    epsilon: f64,
    density_floor: f64,
) -> Result<FailureProbability> {
    if !(0.0..=1.0).contains(&epsilon) || epsilon.is_nan() {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if n == 0 {
        return Err(Error::invalid_parameter("n", "must be >= 1"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid_parameter(
            "h",
            format!("must be positive and finite, got {h}"),
        ));
    }
    let c = ball_volume_constant(p);
    let exponent = -(n as f64) * c * density_floor * h.powi(p as i32) * epsilon * epsilon / 2.0;
    Ok(FailureProbability::from_raw(2.0 * exponent.exp()))
}

/// Fixed-decision deviation bound: error at most `bias_term +
/// deviation_term` except with `failure_probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationBound {
    /// `L_gamma * h`
    pub bias_term: f64,
    /// `epsilon`
    pub deviation_term: f64,
    pub failure_probability: FailureProbability,
}

/// Bundles the deviation probability with the error threshold it certifies.
pub fn generalization_bound(
    n: usize,
    p: usize,
    h: f64,
    epsilon: f64,
    density_floor: f64,
    lipschitz_gamma: f64,
) -> Result<GeneralizationBound> {
    let failure_probability = generalization_failure_prob(n, p, h, epsilon, density_floor)?;
    Ok(GeneralizationBound {
        bias_term: lipschitz_gamma * h,
        deviation_term: epsilon,
        failure_probability,
    })
}

/// Upper bound on how many points a tau-net over a set of diameter `D`
/// in `R^d` needs. See [`CoveringMode`] for the available bounds.
pub fn covering_number(diameter: f64, tau: f64, d: usize, mode: &CoveringMode) -> f64 {
    assert!(diameter > 0.0 && tau > 0.0 && d >= 1);
    match mode {
        CoveringMode::Ball => {
            if tau >= diameter {
                1.0
            } else {
                (1.0 + 2.0 * diameter / tau).powi(d as i32)
            }
        }
        CoveringMode::Scaled { constant } => {
            if diameter / tau >= 1.0 {
                constant * (diameter / tau).powi(d as i32)
            } else {
                *constant
            }
        }
    }
}

fn log_covering_over_delta(params: &BoundParams) -> Result<f64> {
    let n_tau = covering_number(
        params.diameter,
        params.tau,
        params.decision_dim,
        &params.covering,
    );
    let log_arg = 2.0 * n_tau / params.delta;
    if log_arg <= 1.0 || log_arg.is_nan() {
        return Err(Error::DegenerateBound(log_arg));
    }
    Ok(log_arg.ln())
}

/// Bandwidth that minimizes the combined bias and deviation terms at
/// sample size `n`:
/// `h(n) = (2 L_gamma^2 n c f / (p^2 log(2|X_tau|/delta)))^(-1/(p+2))`.
///
/// Doubling `n` shrinks the result by exactly `2^(-1/(p+2))`.
pub fn optimal_bandwidth(n: usize, params: &BoundParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid_parameter("n", "must be >= 1"));
    }
    params.validate()?;
    let p = params.covariate_dim;
    let c = ball_volume_constant(p);
    let log_term = log_covering_over_delta(params)?;
    let base = 2.0 * params.lipschitz_gamma * params.lipschitz_gamma
        * n as f64
        * c
        * params.density_floor
        / ((p * p) as f64 * log_term);
    Ok(base.powf(-1.0 / (p as f64 + 2.0)))
}

/// High-probability suboptimality certificate for the net-optimized
/// decision at sample size `n` under the balanced bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalityBound {
    /// Combined bias and deviation contribution at the balanced bandwidth.
    pub statistical_term: f64,
    /// `4 L_x tau`, the price of searching a tau-net instead of the box.
    pub discretization_term: f64,
    pub total: f64,
    pub optimal_bandwidth: f64,
}

/// Evaluates the suboptimality bound
/// `2 L_gamma^(p/(p+2)) (p+2)/(4 p^p)^(1/(p+2)) (2 log(2|X_tau|/delta)/(n c f))^(1/(p+2)) + 4 L_x tau`,
/// which holds with probability at least `1 - delta`.
pub fn suboptimality_bound(n: usize, params: &BoundParams) -> Result<SuboptimalityBound> {
    if n == 0 {
        return Err(Error::invalid_parameter("n", "must be >= 1"));
    }
    params.validate()?;
    let p = params.covariate_dim as f64;
    let c = ball_volume_constant(params.covariate_dim);
    let log_term = log_covering_over_delta(params)?;
    let statistical_term = 2.0
        * params.lipschitz_gamma.powf(p / (p + 2.0))
        * (p + 2.0)
        / (4.0 * p.powf(p)).powf(1.0 / (p + 2.0))
        * (2.0 * log_term / (n as f64 * c * params.density_floor)).powf(1.0 / (p + 2.0));
    let discretization_term = 4.0 * params.lipschitz_x * params.tau;
    Ok(SuboptimalityBound {
        statistical_term,
        discretization_term,
        total: statistical_term + discretization_term,
        optimal_bandwidth: optimal_bandwidth(n, params)?,
    })
}

/// Number of samples sufficient for a suboptimality gap of `epsilon` with
/// probability at least `1 - delta`.
///
/// The net resolution is fixed internally at `tau = epsilon / (8 L_x)` so
/// the discretization term accounts for half the gap budget; `params.tau`
/// and `params.delta` are ignored in favor of the arguments.
pub fn sample_complexity(epsilon: f64, delta: f64, params: &BoundParams) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid_parameter(
            "epsilon",
            format!("must lie in (0, 1), got {epsilon}"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_parameter(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    params.validate()?;
    let p = params.covariate_dim as f64;
    let c = ball_volume_constant(params.covariate_dim);
    let tau = epsilon / (8.0 * params.lipschitz_x);
    let n_tau = covering_number(params.diameter, tau, params.decision_dim, &params.covering);
    let log_arg = 2.0 * n_tau / delta;
    if log_arg <= 1.0 || log_arg.is_nan() {
        return Err(Error::DegenerateBound(log_arg));
    }
    let bound = 2f64.powf(2.0 * p + 3.0)
        * params.lipschitz_gamma.powf(p)
        * (p + 2.0).powf(p + 2.0)
        * log_arg.ln()
        / (p.powf(p) * epsilon.powf(p + 2.0) * c * params.density_floor);
    Ok(bound.ceil().max(1.0) as u64)
}

/// The two-term error bound `g(h) = 2 L_gamma h + 2 sqrt(2 log(2|X_tau|/delta) / (n c f h^p))`
/// whose minimizer over `h` is [`optimal_bandwidth`]. Exposed so callers
/// can cross-check the closed-form substitution numerically.
pub fn two_term_bound(h: f64, n: usize, params: &BoundParams) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid_parameter(
            "h",
            format!("must be positive and finite, got {h}"),
        ));
    }
    let p = params.covariate_dim;
    let c = ball_volume_constant(p);
    let log_term = log_covering_over_delta(params)?;
    Ok(2.0 * params.lipschitz_gamma * h
        + 2.0
            * (2.0 * log_term / (n as f64 * c * params.density_floor * h.powi(p as i32))).sqrt())
}
