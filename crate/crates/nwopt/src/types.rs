//! Shared domain types with constructor-time invariant validation.
//!
//! Every type here is immutable after construction and safe to share
//! read-only across worker threads. Constructors return a typed error on
//! any invariant violation; nothing is silently clamped.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euclidean distance between two equal-length vectors.
///
/// Summation runs in index order so results are reproducible bit for bit.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let diff = x - y;
        sum += diff * diff;
    }
    sum.sqrt()
}

/// Paired covariate/outcome observations stored row-major.
///
/// Holds `n` rows of covariates in `R^p` and outcomes in `R^q`. All entries
/// are finite; `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: Vec<f64>,
    outcomes: Vec<f64>,
    n: usize,
    p: usize,
    q: usize,
}

impl Dataset {
    /// Builds a dataset from row-major covariate and outcome buffers.
    pub fn new(covariates: Vec<f64>, outcomes: Vec<f64>, p: usize, q: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid_parameter("p", "must be >= 1"));
        }
        if q == 0 {
            return Err(Error::invalid_parameter("q", "must be >= 1"));
        }
        if !covariates.len().is_multiple_of(p) {
            return Err(Error::DimensionMismatch {
                context: "covariate buffer length",
                expected: p,
                actual: covariates.len(),
            });
        }
        let n = covariates.len() / p;
        if n == 0 {
            return Err(Error::invalid_parameter("n", "dataset must have >= 1 row"));
        }
        if outcomes.len() != n * q {
            return Err(Error::DimensionMismatch {
                context: "outcome buffer length",
                expected: n * q,
                actual: outcomes.len(),
            });
        }
        for (idx, v) in covariates.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / p,
                    col: idx % p,
                });
            }
        }
        for (idx, v) in outcomes.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / q,
                    col: p + idx % q,
                });
            }
        }
        Ok(Dataset {
            covariates,
            outcomes,
            n,
            p,
            q,
        })
    }

    /// Splits a raw `n x (p+q)` matrix into covariates (first `p` columns)
    /// and outcomes (last `q` columns).
    pub fn from_rows(rows: &[Vec<f64>], p: usize, q: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_parameter("rows", "need at least one row"));
        }
        let mut covariates = Vec::with_capacity(rows.len() * p);
        let mut outcomes = Vec::with_capacity(rows.len() * q);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p + q {
                return Err(Error::DimensionMismatch {
                    context: "row width",
                    expected: p + q,
                    actual: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
            covariates.extend_from_slice(&row[..p]);
            outcomes.extend_from_slice(&row[p..]);
        }
        Dataset::new(covariates, outcomes, p, q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn covariate_dim(&self) -> usize {
        self.p
    }

    pub fn outcome_dim(&self) -> usize {
        self.q
    }

    /// Covariate vector of observation `i`.
    pub fn covariate(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.p..(i + 1) * self.p]
    }

    /// Outcome vector of observation `i`.
    pub fn outcome(&self, i: usize) -> &[f64] {
        &self.outcomes[i * self.q..(i + 1) * self.q]
    }
}

/// Splits a raw matrix into a validated [`Dataset`].
///
/// The first `p` columns of each row become the covariates, the last `q`
/// the outcomes. Fails with `DimensionMismatch` when a row has a different
/// width and `NonFiniteEntry` on any NaN or infinity.
pub fn validate_dataset(rows: &[Vec<f64>], p: usize, q: usize) -> Result<Dataset> {
    Dataset::from_rows(rows, p, q)
}

type LossFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A loss evaluator with its declared Lipschitz constants.
///
/// The evaluator must map into [0, 1] on its declared domain. That range is
/// a contract checked by randomized spot tests, not per-call assertions, so
/// the estimator hot path stays cheap.
#[derive(Clone)]
pub struct LossModel {
    evaluate: Arc<LossFn>,
    lipschitz_x: f64,
    lipschitz_gamma: f64,
    name: String,
}

impl LossModel {
    pub fn new(
        name: impl Into<String>,
        lipschitz_x: f64,
        lipschitz_gamma: f64,
        evaluate: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lipschitz_x > 0.0 && lipschitz_x.is_finite()) {
            return Err(Error::invalid_parameter(
                "lipschitz_x",
                format!("must be positive and finite, got {lipschitz_x}"),
            ));
        }
        if !(lipschitz_gamma > 0.0 && lipschitz_gamma.is_finite()) {
            return Err(Error::invalid_parameter(
                "lipschitz_gamma",
                format!("must be positive and finite, got {lipschitz_gamma}"),
            ));
        }
        Ok(LossModel {
            evaluate: Arc::new(evaluate),
            lipschitz_x,
            lipschitz_gamma,
            name: name.into(),
        })
    }

    /// Evaluates the loss at decision `x` and outcome `xi`.
    pub fn evaluate(&self, x: &[f64], xi: &[f64]) -> f64 {
        (self.evaluate)(x, xi)
    }

    pub fn lipschitz_x(&self) -> f64 {
        self.lipschitz_x
    }

    pub fn lipschitz_gamma(&self) -> f64 {
        self.lipschitz_gamma
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same loss scaled by `lambda`; Lipschitz constants scale with it.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid_parameter(
                "lambda",
                format!("must lie in (0, 1], got {lambda}"),
            ));
        }
        let inner = Arc::clone(&self.evaluate);
        LossModel::new(
            format!("{}*{}", lambda, self.name),
            self.lipschitz_x * lambda,
            self.lipschitz_gamma * lambda,
            move |x, xi| lambda * inner(x, xi),
        )
    }
}

impl fmt::Debug for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossModel")
            .field("name", &self.name)
            .field("lipschitz_x", &self.lipschitz_x)
            .field("lipschitz_gamma", &self.lipschitz_gamma)
            .finish()
    }
}

/// Axis-aligned feasible box in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FeasibleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid_parameter("d", "box must have >= 1 axis"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for (j, (lo, hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFiniteEntry { row: 0, col: j });
            }
            if lo >= hi {
                return Err(Error::invalid_parameter(
                    "bounds",
                    format!("lower[{j}] = {lo} must be strictly below upper[{j}] = {hi}"),
                ));
            }
        }
        Ok(FeasibleBox { lower, upper })
    }

    /// The unit box `[0, 1]^d`.
    pub fn unit(d: usize) -> Result<Self> {
        FeasibleBox::new(vec![0.0; d], vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Euclidean diameter `||upper - lower||`.
    pub fn diameter(&self) -> f64 {
        euclidean_distance(&self.upper, &self.lower)
    }

    /// Whether `x` lies inside the box (boundary included).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// A contextual stochastic optimization problem: loss, feasible set, and
/// the covariate density floor.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub loss: LossModel,
    pub feasible: FeasibleBox,
    density_floor: f64,
    covariate_dim: usize,
    outcome_dim: usize,
}

impl ProblemSpec {
    pub fn new(
        loss: LossModel,
        feasible: FeasibleBox,
        density_floor: f64,
        covariate_dim: usize,
        outcome_dim: usize,
    ) -> Result<Self> {
        if !(density_floor > 0.0 && density_floor.is_finite()) {
            return Err(Error::invalid_parameter(
                "density_floor",
                format!("must be positive and finite, got {density_floor}"),
            ));
        }
        if covariate_dim == 0 || outcome_dim == 0 {
            return Err(Error::invalid_parameter(
                "dimensions",
                "covariate and outcome dimensions must be >= 1",
            ));
        }
        Ok(ProblemSpec {
            loss,
            feasible,
            density_floor,
            covariate_dim,
            outcome_dim,
        })
    }

    pub fn density_floor(&self) -> f64 {
        self.density_floor
    }

    pub fn covariate_dim(&self) -> usize {
        self.covariate_dim
    }

    pub fn outcome_dim(&self) -> usize {
        self.outcome_dim
    }

    /// Checks that a dataset's dimensions agree with this problem.
    pub fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if data.covariate_dim() != self.covariate_dim {
            return Err(Error::DimensionMismatch {
                context: "dataset covariate dimension",
                expected: self.covariate_dim,
                actual: data.covariate_dim(),
            });
        }
        if data.outcome_dim() != self.outcome_dim {
            return Err(Error::DimensionMismatch {
                context: "dataset outcome dimension",
                expected: self.outcome_dim,
                actual: data.outcome_dim(),
            });
        }
        Ok(())
    }
}

/// How the size of a tau-net over the feasible set is bounded.
///
/// The covering bound carries an unspecified constant factor; outputs that
/// depend on it are labeled with the mode that produced them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringMode {
    /// `(1 + 2D/tau)^d`, the classical covering bound for a set of
    /// diameter `D`; collapses to a single point once `tau >= D`.
    #[default]
    Ball,
    /// `constant * (D/tau)^d`, floored at `constant` when `tau >= D`.
    Scaled { constant: f64 },
}

impl CoveringMode {
    pub(crate) fn validate(&self) -> Result<()> {
        if let CoveringMode::Scaled { constant } = self {
            if !(*constant >= 1.0 && constant.is_finite()) {
                return Err(Error::invalid_parameter(
                    "covering_constant",
                    format!("must be >= 1 and finite, got {constant}"),
                ));
            }
        }
        Ok(())
    }

    /// Human-readable label used when reporting bound values.
    pub fn label(&self) -> String {
        match self {
            CoveringMode::Ball => "ball: (1 + 2D/tau)^d".to_string(),
            CoveringMode::Scaled { constant } => format!("scaled: {constant} * (D/tau)^d"),
        }
    }
}

impl fmt::Display for CoveringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The parameter bundle feeding every bound formula: confidence level,
/// net resolution, covering mode, and the problem constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub delta: f64,
    pub tau: f64,
    pub covering: CoveringMode,
    pub lipschitz_x: f64,
    pub lipschitz_gamma: f64,
    pub density_floor: f64,
    pub diameter: f64,
    pub decision_dim: usize,
    pub covariate_dim: usize,
}

impl BoundParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta: f64,
        tau: f64,
        covering: CoveringMode,
        lipschitz_x: f64,
        lipschitz_gamma: f64,
        density_floor: f64,
        diameter: f64,
        decision_dim: usize,
        covariate_dim: usize,
    ) -> Result<Self> {
        let params = BoundParams {
            delta,
            tau,
            covering,
            lipschitz_x,
            lipschitz_gamma,
            density_floor,
            diameter,
            decision_dim,
            covariate_dim,
        };
        params.validate()?;
        Ok(params)
    }

    /// Pulls the problem constants out of a [`ProblemSpec`].
    pub fn from_problem(
        problem: &ProblemSpec,
        delta: f64,
        tau: f64,
        covering: CoveringMode,
    ) -> Result<Self> {
        BoundParams::new(
            delta,
            tau,
            covering,
            problem.loss.lipschitz_x(),
            problem.loss.lipschitz_gamma(),
            problem.density_floor(),
            problem.feasible.diameter(),
            problem.feasible.dim(),
            problem.covariate_dim(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid_parameter(
                "delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid_parameter(
                "tau",
                format!("must be positive and finite, got {}", self.tau),
            ));
        }
        self.covering.validate()?;
        for (name, v) in [
            ("lipschitz_x", self.lipschitz_x),
            ("lipschitz_gamma", self.lipschitz_gamma),
            ("density_floor", self.density_floor),
            ("diameter", self.diameter),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid_parameter(
                    "bound params",
                    format!("{name} must be positive and finite, got {v}"),
                ));
            }
        }
        if self.decision_dim == 0 || self.covariate_dim == 0 {
            return Err(Error::invalid_parameter(
                "bound params",
                "dimensions must be >= 1",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_dataset_splits_columns() {
        let rows = vec![
            vec![0.1, 0.9],
            vec![0.2, 0.8],
            vec![0.3, 0.7],
        ];
        let data = validate_dataset(&rows, 1, 1).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.covariate(1), &[0.2]);
        assert_eq!(data.outcome(2), &[0.7]);
    }

    #[test]
    fn validate_dataset_minimal_row() {
        let rows = vec![vec![0.5, 0.25, 0.75]];
        let data = validate_dataset(&rows, 2, 1).unwrap();
        assert_eq!(data.n(), 1);
        assert_eq!(data.covariate(0), &[0.5, 0.25]);
        assert_eq!(data.outcome(0), &[0.75]);
    }

    #[test]
    fn validate_dataset_rejects_width_mismatch() {
        let rows = vec![vec![0.1, 0.2, 0.3], vec![0.4, 0.5, 0.6]];
        let err = validate_dataset(&rows, 3, 1).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn validate_dataset_rejects_nan() {
        let rows = vec![vec![0.1, f64::NAN]];
        let err = validate_dataset(&rows, 1, 1).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEntry { row: 0, col: 1 }));
    }

    #[test]
    fn box_diameter_is_euclidean_norm() {
        let b = FeasibleBox::new(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(b.diameter(), 5.0);
    }

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(FeasibleBox::new(vec![1.0], vec![1.0]).is_err());
        assert!(FeasibleBox::new(vec![2.0], vec![1.0]).is_err());
    }

    #[test]
    fn loss_model_rejects_bad_constants() {
        assert!(LossModel::new("l", 0.0, 1.0, |_, _| 0.0).is_err());
        assert!(LossModel::new("l", 1.0, f64::INFINITY, |_, _| 0.0).is_err());
    }

    #[test]
    fn bound_params_validation() {
        let ok = BoundParams::new(0.05, 0.1, CoveringMode::Ball, 1.0, 1.0, 1.0, 1.0, 1, 1);
        assert!(ok.is_ok());
        let bad_delta =
            BoundParams::new(1.0, 0.1, CoveringMode::Ball, 1.0, 1.0, 1.0, 1.0, 1, 1);
        assert!(bad_delta.is_err());
        let bad_constant = BoundParams::new(
            0.05,
            0.1,
            CoveringMode::Scaled { constant: 0.5 },
            1.0,
            1.0,
            1.0,
            1.0,
            1,
            1,
        );
        assert!(bad_constant.is_err());
    }

    #[test]
    fn covering_mode_serde_round_trip() {
        let ball: CoveringMode = serde_json::from_str("\"ball\"").unwrap();
        assert_eq!(ball, CoveringMode::Ball);
        let scaled: CoveringMode =
            serde_json::from_str("{\"scaled\":{\"constant\":2.0}}").unwrap();
        assert_eq!(scaled, CoveringMode::Scaled { constant: 2.0 });
    }
}
