//! Synthetic contextual problems with fully known data-generating
//! processes, analytic Lipschitz constants, and closed-form conditional
//! expectations. These supply the ground truth that every experiment
//! measures the estimator and optimizer against.
//!
//! The data-generating process is deliberately simple: covariates are
//! uniform on `[0,1]^p` (so the density floor is exactly 1), the outcome
//! is an affine function of the mean covariate plus bounded uniform noise,
//! and the generator parameters are constrained so the outcome never
//! leaves `[0,1]` — no clipping, so conditional quantiles and expectations
//! stay in closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, FeasibleBox, LossModel, ProblemSpec};

/// Parameters of the synthetic data-generating process:
/// `gamma ~ Uniform[0,1]^p`, `xi = alpha + beta * mean(gamma) + noise`,
/// `noise ~ Uniform[-noise_half_width, noise_half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub covariate_dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub noise_half_width: f64,
}

impl Default for GeneratorSpec {
    /// Comfortable margins: `alpha - w = 0.1 >= 0`, `alpha + beta + w = 0.9 <= 1`.
    fn default() -> Self {
        GeneratorSpec {
            covariate_dim: 1,
            alpha: GeneratorSpec::default_alpha(),
            beta: GeneratorSpec::default_beta(),
            noise_half_width: GeneratorSpec::default_noise_half_width(),
        }
    }
}

impl GeneratorSpec {
    pub fn default_alpha() -> f64 {
        0.3
    }

    pub fn default_beta() -> f64 {
        0.4
    }

    pub fn default_noise_half_width() -> f64 {
        0.2
    }

    pub fn new(covariate_dim: usize, alpha: f64, beta: f64, noise_half_width: f64) -> Result<Self> {
        let spec = GeneratorSpec {
            covariate_dim,
            alpha,
            beta,
            noise_half_width,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the clip-free guarantee: the outcome range
    /// `[alpha - w, alpha + beta + w]` must sit inside `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        if self.covariate_dim == 0 {
            return Err(Error::InvalidGenerator("covariate_dim must be >= 1".into()));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("noise_half_width", self.noise_half_width),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidGenerator(format!("{name} must be finite")));
            }
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidGenerator(
                "beta must be positive so the covariate effect is nontrivial".into(),
            ));
        }
        if self.noise_half_width <= 0.0 {
            return Err(Error::InvalidGenerator(
                "noise_half_width must be positive".into(),
            ));
        }
        if self.alpha - self.noise_half_width < 0.0 {
            return Err(Error::InvalidGenerator(format!(
                "outcome can drop below 0: alpha - w = {}",
                self.alpha - self.noise_half_width
            )));
        }
        if self.alpha + self.beta + self.noise_half_width > 1.0 {
            return Err(Error::InvalidGenerator(format!(
                "outcome can exceed 1: alpha + beta + w = {}",
                self.alpha + self.beta + self.noise_half_width
            )));
        }
        Ok(())
    }

    /// Conditional mean of the outcome given covariates.
    pub fn conditional_outcome_mean(&self, gamma: &[f64]) -> f64 {
        debug_assert_eq!(gamma.len(), self.covariate_dim);
        let mean: f64 = gamma.iter().sum::<f64>() / self.covariate_dim as f64;
        self.alpha + self.beta * mean
    }
}

/// Closed-form access to the true conditional expected loss and the true
/// optimal decision of a synthetic problem.
pub trait ConditionalOracle: Send + Sync {
    /// `E[loss(x, xi) | gamma]`, exact up to floating-point rounding.
    fn conditional_mean_loss(&self, x: &[f64], gamma: &[f64]) -> f64;

    /// The feasible decision minimizing the conditional expected loss,
    /// together with the attained value.
    fn true_optimum(&self, gamma: &[f64]) -> (Vec<f64>, f64);
}

/// Convenience alias matching the trait-object form most call sites use.
pub fn true_conditional_loss(oracle: &dyn ConditionalOracle, x: &[f64], gamma: &[f64]) -> f64 {
    oracle.conditional_mean_loss(x, gamma)
}

/// Closed-form oracle for the normalized newsvendor loss under the affine
/// uniform-noise generator.
#[derive(Debug, Clone, Copy)]
pub struct NewsvendorOracle {
    cu: f64,
    co: f64,
    gen: GeneratorSpec,
}

impl NewsvendorOracle {
    fn scale(&self) -> f64 {
        self.cu.max(self.co)
    }

    /// Critical fractile `cu / (cu + co)`.
    pub fn quantile_level(&self) -> f64 {
        self.cu / (self.cu + self.co)
    }

    pub fn underage_cost(&self) -> f64 {
        self.cu
    }

    pub fn overage_cost(&self) -> f64 {
        self.co
    }
}

impl ConditionalOracle for NewsvendorOracle {
    fn conditional_mean_loss(&self, x: &[f64], gamma: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), 1);
        let x = x[0];
        let m = self.gen.conditional_outcome_mean(gamma);
        let w = self.gen.noise_half_width;
        let scale = self.scale();
        if x <= m - w {
            // decision below the whole outcome range: pure underage
            self.cu * (m - x) / scale
        } else if x >= m + w {
            self.co * (x - m) / scale
        } else {
            let under = m + w - x;
            let over = x - m + w;
            (self.cu * under * under + self.co * over * over) / (4.0 * w * scale)
        }
    }

    fn true_optimum(&self, gamma: &[f64]) -> (Vec<f64>, f64) {
        let m = self.gen.conditional_outcome_mean(gamma);
        let w = self.gen.noise_half_width;
        // the critical-fractile quantile of Uniform[m-w, m+w]
        let x_star = (m + w * (2.0 * self.quantile_level() - 1.0)).clamp(0.0, 1.0);
        let value = self.conditional_mean_loss(&[x_star], gamma);
        (vec![x_star], value)
    }
}

/// A synthetic problem bundle: the optimization problem, its generator,
/// and the ground-truth oracle.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub spec: ProblemSpec,
    pub generator: GeneratorSpec,
    pub oracle: NewsvendorOracle,
}

/// Serializable snapshot of a synthetic problem, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescription {
    pub kind: String,
    pub covariate_dim: usize,
    pub underage_cost: f64,
    pub overage_cost: f64,
    pub alpha: f64,
    pub beta: f64,
    pub noise_half_width: f64,
    pub lipschitz_x: f64,
    pub lipschitz_gamma: f64,
    pub density_floor: f64,
}

impl SyntheticProblem {
    pub fn describe(&self) -> ProblemDescription {
        ProblemDescription {
            kind: self.spec.loss.name().to_string(),
            covariate_dim: self.generator.covariate_dim,
            underage_cost: self.oracle.underage_cost(),
            overage_cost: self.oracle.overage_cost(),
            alpha: self.generator.alpha,
            beta: self.generator.beta,
            noise_half_width: self.generator.noise_half_width,
            lipschitz_x: self.spec.loss.lipschitz_x(),
            lipschitz_gamma: self.spec.loss.lipschitz_gamma(),
            density_floor: self.spec.density_floor(),
        }
    }
}

/// Builds the normalized newsvendor problem
/// `loss(x, xi) = (cu (xi - x)_+ + co (x - xi)_+) / max(cu, co)` on the
/// decision interval `[0, 1]`, with analytically derived constants:
/// `L_x = 1` and `L_gamma = beta / sqrt(p)`.
pub fn make_newsvendor(p: usize, cu: f64, co: f64, gen: GeneratorSpec) -> Result<SyntheticProblem> {
    if !(cu > 0.0 && cu.is_finite() && co > 0.0 && co.is_finite()) {
        return Err(Error::invalid_parameter(
            "cu/co",
            format!("unit costs must be positive and finite, got cu={cu}, co={co}"),
        ));
    }
    if gen.covariate_dim != p {
        return Err(Error::DimensionMismatch {
            context: "generator covariate dimension",
            expected: p,
            actual: gen.covariate_dim,
        });
    }
    gen.validate()?;

    let scale = cu.max(co);
    let lipschitz_gamma = gen.beta / (p as f64).sqrt();
    let loss = LossModel::new("newsvendor", 1.0, lipschitz_gamma, move |x, xi| {
        let diff = xi[0] - x[0];
        (cu * diff.max(0.0) + co * (-diff).max(0.0)) / scale
    })?;
    let spec = ProblemSpec::new(loss, FeasibleBox::unit(1)?, 1.0, p, 1)?;
    let oracle = NewsvendorOracle { cu, co, gen };
    let problem = SyntheticProblem {
        spec,
        generator: gen,
        oracle,
    };
    verify_optimum_on_grid(&problem)?;
    Ok(problem)
}

/// Construction-time check that the closed-form optimum is the minimum of
/// the conditional expected loss over a fine decision grid.
fn verify_optimum_on_grid(problem: &SyntheticProblem) -> Result<()> {
    let p = problem.generator.covariate_dim;
    for corner in [0.0, 0.5, 1.0] {
        let gamma = vec![corner; p];
        let (x_star, value) = problem.oracle.true_optimum(&gamma);
        let mut grid_min = f64::INFINITY;
        for k in 0..=2000 {
            let x = k as f64 / 2000.0;
            grid_min = grid_min.min(problem.oracle.conditional_mean_loss(&[x], &gamma));
        }
        // the grid cannot beat the optimum, and must come within one step
        if value > grid_min + 1e-12 || grid_min - value > 1e-3 {
            return Err(Error::InvalidGenerator(format!(
                "closed-form optimum {value} at {x_star:?} inconsistent with grid minimum {grid_min}"
            )));
        }
    }
    Ok(())
}

/// RNG for a single draw: an independent ChaCha stream per (seed, index)
/// pair, so sampling is deterministic and order-free under parallelism.
fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` i.i.d. observations from the generator. Two calls with the
/// same seed produce bitwise-identical datasets.
pub fn sample_dataset(gen: &GeneratorSpec, n: usize, seed: u64) -> Result<Dataset> {
    gen.validate()?;
    if n == 0 {
        return Err(Error::invalid_parameter("n", "must be >= 1"));
    }
    let p = gen.covariate_dim;
    let mut covariates = Vec::with_capacity(n * p);
    let mut outcomes = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = draw_rng(seed, i as u64);
        let mut mean = 0.0;
        for _ in 0..p {
            let g: f64 = rng.random();
            covariates.push(g);
            mean += g;
        }
        mean /= p as f64;
        let noise = gen.noise_half_width * (2.0 * rng.random::<f64>() - 1.0);
        outcomes.push(gen.alpha + gen.beta * mean + noise);
    }
    Dataset::new(covariates, outcomes, p, 1)
}

/// Adaptive-Simpson evaluation of the conditional expected loss, used to
/// validate the closed forms. Integrates `loss(x, t)` against the uniform
/// conditional outcome density.
pub fn quadrature_conditional_loss(
    problem: &SyntheticProblem,
    x: &[f64],
    gamma: &[f64],
    tol: f64,
) -> f64 {
    let m = problem.generator.conditional_outcome_mean(gamma);
    let w = problem.generator.noise_half_width;
    let density = 1.0 / (2.0 * w);
    let f = |t: f64| problem.spec.loss.evaluate(x, &[t]) * density;
    adaptive_simpson(&f, m - w, m + w, tol)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = simpson(f, a, mid);
    let right = simpson(f, mid, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson_rec(f, a, mid, left, tol / 2.0, depth - 1)
            + adaptive_simpson_rec(f, mid, b, right, tol / 2.0, depth - 1)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, 48)
}
