//! Contextual stochastic optimization through spherical-kernel
//! Nadaraya-Watson regression, with finite-sample guarantees.
//!
//! Given paired observations of covariates and uncertain outcomes, the
//! estimator in [`estimator`] approximates the conditional expected loss
//! of a decision by averaging the observed losses of all samples whose
//! covariate falls within a radius-`h` ball of the query. The optimizer in
//! [`optimizer`] minimizes that estimate exhaustively over an explicit
//! tau-net of the feasible box, and [`theory`] provides the matching
//! closed-form machinery: the deviation probability of the estimate at a
//! fixed decision, the bandwidth that balances the bias and deviation
//! contributions, the suboptimality certificate for the net solution, and
//! a sample-complexity calculator.
//!
//! [`problems`] ships a synthetic newsvendor family with exact conditional
//! expectations and analytically derived Lipschitz constants, and
//! [`experiments`] uses it to verify every bound empirically: deviation
//! coverage at a fixed decision, the deterministic bias inequality, the
//! `n^(-1/(p+2))` error rate under the balanced bandwidth, and the
//! end-to-end suboptimality guarantee.
//!
//! Each major capability has a runnable example under `examples/`; the
//! `nwopt` binary exposes the same surface as subcommands for use from
//! scripts. See the crate README for both.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod optimizer;
pub mod problems;
pub mod theory;
pub mod types;

pub use error::{Error, Result};
pub use estimator::{neighbors, nw_conditional_mean_surrogate, nw_estimate, Estimate, NeighborSet};
pub use optimizer::{build_tau_net, solve_nw, SolveResult, TauNet};
pub use problems::{
    make_newsvendor, sample_dataset, true_conditional_loss, ConditionalOracle, GeneratorSpec,
    SyntheticProblem,
};
pub use theory::{
    ball_probability_floor, ball_volume_constant, covering_number, generalization_failure_prob,
    optimal_bandwidth, sample_complexity, suboptimality_bound, GeneralizationBound,
    SuboptimalityBound,
};
pub use types::{
    validate_dataset, BoundParams, CoveringMode, Dataset, FeasibleBox, LossModel, ProblemSpec,
};
