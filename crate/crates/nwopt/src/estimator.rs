//! Spherical-kernel Nadaraya-Watson conditional-expectation estimator.
//!
//! The kernel is the indicator of the closed ball of radius `h`: a sample
//! contributes if and only if its covariate lies within Euclidean distance
//! `h` of the query, ties at exactly `h` included. On an empty neighborhood
//! the estimate is defined as 0; the result carries an `empty_neighborhood`
//! flag so callers can tell "estimated 0" from "no data".

use crate::error::{Error, Result};
use crate::problems::ConditionalOracle;
use crate::types::{euclidean_distance, Dataset, LossModel};

/// Indices of the dataset rows inside the closed ball around a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    indices: Vec<usize>,
}

impl NeighborSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn count(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A kernel-regression estimate together with the neighborhood it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub neighbor_count: usize,
    pub empty_neighborhood: bool,
}

fn check_query(data: &Dataset, gamma_query: &[f64]) -> Result<()> {
    if gamma_query.len() != data.covariate_dim() {
        return Err(Error::DimensionMismatch {
            context: "gamma query",
            expected: data.covariate_dim(),
            actual: gamma_query.len(),
        });
    }
    Ok(())
}

/// Exact linear scan for all samples with `||gamma_query - gamma_i|| <= h`.
pub fn neighbors(data: &Dataset, gamma_query: &[f64], h: f64) -> Result<NeighborSet> {
    check_query(data, gamma_query)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid_parameter(
            "h",
            format!("bandwidth must be positive and finite, got {h}"),
        ));
    }
    let indices = (0..data.n())
        .filter(|&i| euclidean_distance(gamma_query, data.covariate(i)) <= h)
        .collect();
    Ok(NeighborSet { indices })
}

/// Nadaraya-Watson estimate of the conditional expected loss at `x`.
///
/// Equals the unweighted average of `loss(x, xi_i)` over the neighbor set,
/// or 0 (flagged) when that set is empty.
pub fn nw_estimate(
    data: &Dataset,
    loss: &LossModel,
    x: &[f64],
    gamma_query: &[f64],
    h: f64,
) -> Result<Estimate> {
    let hood = neighbors(data, gamma_query, h)?;
    Ok(nw_estimate_with_neighbors(data, loss, x, &hood))
}

/// Same as [`nw_estimate`] over a precomputed neighborhood. Lets the net
/// optimizer scan for neighbors once and reuse them at every net point.
pub fn nw_estimate_with_neighbors(
    data: &Dataset,
    loss: &LossModel,
    x: &[f64],
    hood: &NeighborSet,
) -> Estimate {
    if hood.is_empty() {
        return Estimate {
            value: 0.0,
            neighbor_count: 0,
            empty_neighborhood: true,
        };
    }
    let mut sum = 0.0;
    for &i in hood.indices() {
        sum += loss.evaluate(x, data.outcome(i));
    }
    Estimate {
        value: sum / hood.count() as f64,
        neighbor_count: hood.count(),
        empty_neighborhood: false,
    }
}

/// The estimator's conditional mean given the sampled covariates: the same
/// kernel average applied to the true conditional expectations at each
/// neighbor, rather than to the observed losses.
///
/// Only computable on synthetic problems that expose an oracle; the
/// bias/deviation decomposition experiments measure the estimator error
/// against this quantity.
pub fn nw_conditional_mean_surrogate(
    data: &Dataset,
    oracle: &dyn ConditionalOracle,
    x: &[f64],
    gamma_query: &[f64],
    h: f64,
) -> Result<Estimate> {
    let hood = neighbors(data, gamma_query, h)?;
    Ok(surrogate_with_neighbors(data, oracle, x, &hood))
}

/// [`nw_conditional_mean_surrogate`] over a precomputed neighborhood.
pub fn surrogate_with_neighbors(
    data: &Dataset,
    oracle: &dyn ConditionalOracle,
    x: &[f64],
    hood: &NeighborSet,
) -> Estimate {
    if hood.is_empty() {
        return Estimate {
            value: 0.0,
            neighbor_count: 0,
            empty_neighborhood: true,
        };
    }
    let mut sum = 0.0;
    for &i in hood.indices() {
        sum += oracle.conditional_mean_loss(x, data.covariate(i));
    }
    Estimate {
        value: sum / hood.count() as f64,
        neighbor_count: hood.count(),
        empty_neighborhood: false,
    }
}
