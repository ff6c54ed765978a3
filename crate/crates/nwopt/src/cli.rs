//! Command-line surface: dataset CSV format, experiment config schema,
//! report serialization, and one function per subcommand.
//!
//! Exit-code convention (enforced by [`run`]): 0 on success, 1 when an
//! experiment ran but a statistical assertion failed, 2 on usage,
//! validation, or I/O errors.
//!
//! Dataset CSV format: header `g1,...,gp,xi1,...,xiq`, one observation per
//! row, decimal numbers with 17 significant digits, UTF-8, LF line
//! endings. The header encodes the dimensions, so files are
//! self-describing.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::nw_estimate;
use crate::experiments::{
    run_bias_mad, run_coverage, run_rate, run_suboptimality, with_worker_pool, CoverageConfig,
    ExperimentReport, RateConfig, SuboptimalityConfig,
};
use crate::optimizer::solve_nw;
use crate::problems::{make_newsvendor, sample_dataset, GeneratorSpec, SyntheticProblem};
use crate::theory::{
    covering_number, generalization_bound, optimal_bandwidth, sample_complexity,
    suboptimality_bound,
};
use crate::types::{BoundParams, CoveringMode, Dataset, FeasibleBox, LossModel, ProblemSpec};

/// Environment variable overriding config/flag seeds, for smoke tests.
pub const SEED_ENV_VAR: &str = "NWOPT_SEED";

/// Formats with 17 significant digits, enough for exact f64 round-trips.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// Dataset CSV format
// ---------------------------------------------------------------------------

/// Writes a dataset in the canonical CSV format.
pub fn write_dataset_csv(data: &Dataset, out: &mut impl Write) -> Result<()> {
    let mut header = Vec::with_capacity(data.covariate_dim() + data.outcome_dim());
    for j in 1..=data.covariate_dim() {
        header.push(format!("g{j}"));
    }
    for j in 1..=data.outcome_dim() {
        header.push(format!("xi{j}"));
    }
    out.write_all(header.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    for i in 0..data.n() {
        let row: Vec<String> = data
            .covariate(i)
            .iter()
            .chain(data.outcome(i).iter())
            .map(|v| fmt_f64(*v))
            .collect();
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_dataset_to_path(data: &Dataset, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut file = fs::File::create(path)?;
    write_dataset_csv(data, &mut file)?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let fields: Vec<&str> = line.trim_end().split(',').collect();
    let mut p = 0;
    let mut q = 0;
    for field in &fields {
        if q == 0 && *field == format!("g{}", p + 1) {
            p += 1;
        } else if *field == format!("xi{}", q + 1) {
            q += 1;
        } else {
            return Err(Error::CsvParse {
                line: 1,
                reason: format!(
                    "unexpected header field {field:?}; expected g1,...,gp,xi1,...,xiq"
                ),
            });
        }
    }
    if p == 0 || q == 0 {
        return Err(Error::CsvParse {
            line: 1,
            reason: format!("header must declare at least one g and one xi column, got {line:?}"),
        });
    }
    Ok((p, q))
}

/// Reads a dataset from the canonical CSV format, reporting the offending
/// line number on any malformed row.
pub fn read_dataset_csv(reader: impl BufRead) -> Result<Dataset> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvParse {
        line: 1,
        reason: "empty file".into(),
    })?;
    let (p, q) = parse_header(&header?)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != p + q {
            return Err(Error::CsvParse {
                line: line_no,
                reason: format!("expected {} fields, got {}", p + q, fields.len()),
            });
        }
        let mut row = Vec::with_capacity(p + q);
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|e| Error::CsvParse {
                line: line_no,
                reason: format!("column {}: {e}", col + 1),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvParse {
                    line: line_no,
                    reason: format!("column {}: non-finite value {field:?}", col + 1),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::CsvParse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    Dataset::from_rows(&rows, p, q)
}

pub fn read_dataset_from_path(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path)?;
    read_dataset_csv(BufReader::new(file))
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

/// Writes the per-trial records as plot-ready CSV.
pub fn write_records_csv(report: &ExperimentReport, out: &mut impl Write) -> Result<()> {
    out.write_all(
        b"trial_index,seed,n,abs_error,bias_component,mad_component,neighbor_count,gap,bound_violated\n",
    )?;
    for r in &report.records {
        let gap = r.gap.map(fmt_f64).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial_index,
            r.seed,
            r.n,
            fmt_f64(r.abs_error),
            fmt_f64(r.bias_component),
            fmt_f64(r.mad_component),
            r.neighbor_count,
            gap,
            r.bound_violated
        )?;
    }
    Ok(())
}

/// Writes the aggregate report (without the bulky records) as JSON.
pub fn write_report_json(report: &ExperimentReport, out: &mut impl Write) -> Result<()> {
    let mut summary = serde_json::to_value(report)?;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("records");
        obj.insert(
            "trials".into(),
            serde_json::Value::from(report.records.len()),
        );
        obj.insert("assertions".into(), serde_json::to_value(report.assertions())?);
    }
    serde_json::to_writer_pretty(&mut *out, &summary)?;
    out.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Experiment config schema
// ---------------------------------------------------------------------------

fn default_cost() -> f64 {
    1.0
}

/// Synthetic problem parameters. Defaults match [`GeneratorSpec::default`]
/// with symmetric unit costs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub covariate_dim: usize,
    #[serde(default = "default_cost")]
    pub cu: f64,
    #[serde(default = "default_cost")]
    pub co: f64,
    #[serde(default = "GeneratorSpec::default_alpha")]
    pub alpha: f64,
    #[serde(default = "GeneratorSpec::default_beta")]
    pub beta: f64,
    #[serde(default = "GeneratorSpec::default_noise_half_width")]
    pub noise_half_width: f64,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<SyntheticProblem> {
        let gen = GeneratorSpec::new(
            self.covariate_dim,
            self.alpha,
            self.beta,
            self.noise_half_width,
        )?;
        make_newsvendor(self.covariate_dim, self.cu, self.co, gen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Coverage,
    BiasMad,
    Rate,
    Suboptimality,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub records_csv: PathBuf,
    pub report_json: PathBuf,
}

fn default_slope_window() -> f64 {
    0.12
}

/// Experiment run configuration; the schema rejects unknown keys so typos
/// cannot silently change an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub problem: ProblemConfig,
    pub gamma_query: Vec<f64>,
    pub base_seed: u64,
    pub output: OutputConfig,
    #[serde(default)]
    pub x_fixed: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub covering_mode: CoveringMode,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub trials_per_n: Option<usize>,
    #[serde(default = "default_slope_window")]
    pub slope_window: f64,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn require<T: Clone>(value: &Option<T>, name: &'static str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| Error::Config(format!("missing required field {name:?}")))
    }

    fn coverage_config(&self) -> Result<CoverageConfig> {
        Ok(CoverageConfig {
            x_fixed: Self::require(&self.x_fixed, "x_fixed")?,
            gamma_query: self.gamma_query.clone(),
            n: Self::require(&self.n, "n")?,
            h: Self::require(&self.h, "h")?,
            epsilon: match self.experiment {
                // the bias bound does not involve a deviation level
                ExperimentKind::BiasMad => self.epsilon.unwrap_or(0.0),
                _ => Self::require(&self.epsilon, "epsilon")?,
            },
            trials: Self::require(&self.trials, "trials")?,
            base_seed: self.base_seed,
        })
    }

    /// Runs the configured experiment on the configured worker pool.
    pub fn execute(&self) -> Result<ExperimentReport> {
        let problem = self.problem.build()?;
        let report = with_worker_pool(self.workers, || -> Result<ExperimentReport> {
            match self.experiment {
                ExperimentKind::Coverage => run_coverage(&problem, &self.coverage_config()?),
                ExperimentKind::BiasMad => run_bias_mad(&problem, &self.coverage_config()?),
                ExperimentKind::Rate => {
                    let cfg = RateConfig {
                        x_fixed: Self::require(&self.x_fixed, "x_fixed")?,
                        gamma_query: self.gamma_query.clone(),
                        n_grid: Self::require(&self.n_grid, "n_grid")?,
                        trials_per_n: Self::require(&self.trials_per_n, "trials_per_n")?,
                        base_seed: self.base_seed,
                        delta: Self::require(&self.delta, "delta")?,
                        tau: Self::require(&self.tau, "tau")?,
                        covering: self.covering_mode,
                        slope_window: self.slope_window,
                    };
                    run_rate(&problem, &cfg)
                }
                ExperimentKind::Suboptimality => {
                    let cfg = SuboptimalityConfig {
                        gamma_query: self.gamma_query.clone(),
                        n: Self::require(&self.n, "n")?,
                        trials: Self::require(&self.trials, "trials")?,
                        base_seed: self.base_seed,
                        delta: Self::require(&self.delta, "delta")?,
                        tau: Self::require(&self.tau, "tau")?,
                        covering: self.covering_mode,
                    };
                    run_suboptimality(&problem, &cfg)
                }
            }
        })??;
        Ok(report)
    }
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => {
            let seed = text
                .parse::<u64>()
                .map_err(|e| Error::Config(format!("{SEED_ENV_VAR} must be a u64: {e}")))?;
            Ok(Some(seed))
        }
        Err(_) => Ok(None),
    }
}

/// Normalized newsvendor loss for CLI calls against file datasets. The
/// covariate Lipschitz constant of file data is unknown; the declared
/// value is only a placeholder and nothing downstream of `estimate` or
/// `solve` reads it.
fn newsvendor_loss(cu: f64, co: f64) -> Result<LossModel> {
    if !(cu > 0.0 && cu.is_finite() && co > 0.0 && co.is_finite()) {
        return Err(Error::invalid_parameter(
            "cu/co",
            format!("unit costs must be positive and finite, got cu={cu}, co={co}"),
        ));
    }
    let scale = cu.max(co);
    LossModel::new("newsvendor", 1.0, 1.0, move |x, xi| {
        let diff = xi[0] - x[0];
        (cu * diff.max(0.0) + co * (-diff).max(0.0)) / scale
    })
}

fn check_scalar_outcome(data: &Dataset) -> Result<()> {
    if data.outcome_dim() != 1 {
        return Err(Error::DimensionMismatch {
            context: "newsvendor outcome dimension",
            expected: 1,
            actual: data.outcome_dim(),
        });
    }
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs, out: &mut impl Write) -> Result<()> {
    let data = read_dataset_from_path(&args.data)?;
    check_scalar_outcome(&data)?;
    let loss = newsvendor_loss(args.cu, args.co)?;
    let estimate = nw_estimate(&data, &loss, &args.x, &args.query, args.bandwidth)?;
    writeln!(out, "neighbors: {}", estimate.neighbor_count)?;
    writeln!(out, "empty_neighborhood: {}", estimate.empty_neighborhood)?;
    writeln!(out, "estimate: {}", estimate.value)?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs, out: &mut impl Write) -> Result<()> {
    let data = read_dataset_from_path(&args.data)?;
    check_scalar_outcome(&data)?;
    let loss = newsvendor_loss(args.cu, args.co)?;
    let problem = ProblemSpec::new(
        loss,
        FeasibleBox::unit(1)?,
        1.0,
        data.covariate_dim(),
        1,
    )?;
    let result = solve_nw(&data, &problem, &args.query, args.bandwidth, args.tau)?;
    let x_text: Vec<String> = result.x_hat.iter().map(|v| v.to_string()).collect();
    writeln!(out, "x_hat: {}", x_text.join(","))?;
    writeln!(out, "objective_value: {}", result.objective_value)?;
    writeln!(out, "empty_neighborhood: {}", result.empty_neighborhood)?;
    writeln!(out, "net_size: {}", result.net_size)?;
    if let Some(path) = &args.json_out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let json = serde_json::json!({
            "x_hat": result.x_hat,
            "objective_value": result.objective_value,
            "empty_neighborhood": result.empty_neighborhood,
            "net_size": result.net_size,
        });
        fs::write(path, format!("{}\n", serde_json::to_string_pretty(&json)?))?;
    }
    Ok(())
}

impl BoundArgs {
    fn covering_mode(&self) -> CoveringMode {
        match self.covering_constant {
            Some(constant) => CoveringMode::Scaled { constant },
            None => CoveringMode::Ball,
        }
    }

    fn params(&self) -> Result<BoundParams> {
        BoundParams::new(
            self.delta,
            self.tau,
            self.covering_mode(),
            self.lipschitz_x,
            self.lipschitz_gamma,
            self.density_floor,
            self.diameter,
            self.decision_dim,
            self.covariate_dim,
        )
    }
}

pub fn cmd_bandwidth(args: &BandwidthArgs, out: &mut impl Write) -> Result<()> {
    let params = args.bound.params()?;
    let h = optimal_bandwidth(args.n, &params)?;
    let n_tau = covering_number(
        params.diameter,
        params.tau,
        params.decision_dim,
        &params.covering,
    );
    writeln!(out, "covering_mode: {}", params.covering)?;
    writeln!(out, "covering_number: {n_tau}")?;
    writeln!(out, "optimal_bandwidth: {h}")?;
    Ok(())
}

pub fn cmd_bound(args: &BoundCmdArgs, out: &mut impl Write) -> Result<()> {
    let params = args.bound.params()?;
    let sub = suboptimality_bound(args.n, &params)?;
    let n_tau = covering_number(
        params.diameter,
        params.tau,
        params.decision_dim,
        &params.covering,
    );
    writeln!(out, "covering_mode: {}", params.covering)?;
    writeln!(out, "covering_number: {n_tau}")?;
    writeln!(out, "optimal_bandwidth: {}", sub.optimal_bandwidth)?;
    writeln!(out, "statistical_term: {}", sub.statistical_term)?;
    writeln!(out, "discretization_term: {}", sub.discretization_term)?;
    writeln!(out, "suboptimality_total: {}", sub.total)?;
    if let Some(h) = args.h {
        let epsilon = args.epsilon.ok_or_else(|| {
            Error::Config("--epsilon is required together with --h".into())
        })?;
        let pointwise = generalization_bound(
            args.n,
            params.covariate_dim,
            h,
            epsilon,
            params.density_floor,
            params.lipschitz_gamma,
        )?;
        writeln!(out, "bias_term: {}", pointwise.bias_term)?;
        writeln!(out, "deviation_term: {}", pointwise.deviation_term)?;
        writeln!(
            out,
            "failure_probability_raw: {}",
            pointwise.failure_probability.raw
        )?;
        writeln!(
            out,
            "failure_probability: {}",
            pointwise.failure_probability.clamped
        )?;
    }
    Ok(())
}

pub fn cmd_complexity(args: &ComplexityArgs, out: &mut impl Write) -> Result<()> {
    let params = args.bound.params()?;
    let n = sample_complexity(args.epsilon, args.bound.delta, &params)?;
    let tau = args.epsilon / (8.0 * params.lipschitz_x);
    let n_tau = covering_number(params.diameter, tau, params.decision_dim, &params.covering);
    writeln!(out, "covering_mode: {}", params.covering)?;
    writeln!(out, "tau: {tau}")?;
    writeln!(out, "covering_number: {n_tau}")?;
    writeln!(out, "sample_complexity: {n}")?;
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut impl Write) -> Result<()> {
    let seed = seed_override()?.unwrap_or(args.seed);
    let gen = GeneratorSpec::new(args.p, args.alpha, args.beta, args.noise_half_width)?;
    let data = sample_dataset(&gen, args.n, seed)?;
    write_dataset_to_path(&data, &args.out)?;
    writeln!(
        out,
        "wrote {} observations (p={}, seed={}) to {}",
        data.n(),
        data.covariate_dim(),
        seed,
        args.out.display()
    )?;
    Ok(())
}

/// Runs a configured experiment, writes its report files, and prints one
/// pass/fail line per statistical assertion. Returns whether all passed.
pub fn cmd_experiment(args: &ExperimentArgs, out: &mut impl Write) -> Result<bool> {
    let mut config = RunConfig::from_path(&args.config)?;
    if let Some(seed) = seed_override()? {
        config.base_seed = seed;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }

    let report = config.execute()?;

    for path in [&config.output.records_csv, &config.output.report_json] {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
    }
    let mut csv = fs::File::create(&config.output.records_csv)?;
    write_records_csv(&report, &mut csv)?;
    let mut json = fs::File::create(&config.output.report_json)?;
    write_report_json(&report, &mut json)?;

    writeln!(out, "experiment: {}", report.experiment)?;
    writeln!(out, "trials: {}", report.records.len())?;
    writeln!(
        out,
        "empirical_violation_rate: {}",
        report.empirical_violation_rate
    )?;
    writeln!(out, "theoretical_bound: {}", report.theoretical_bound)?;
    writeln!(
        out,
        "theoretical_bound_raw: {}",
        report.theoretical_bound_raw
    )?;
    writeln!(out, "bound_formula: {}", report.bound_formula)?;
    writeln!(out, "binomial_upper_conf: {}", report.binomial_upper_conf)?;
    writeln!(
        out,
        "empty_neighborhood_rate: {}",
        report.empty_neighborhood_rate
    )?;
    if let Some(slope) = report.fitted_rate_slope {
        writeln!(out, "fitted_rate_slope: {slope}")?;
    }
    let mut all_passed = true;
    for assertion in report.assertions() {
        all_passed &= assertion.passed;
        writeln!(
            out,
            "{} {}: {}",
            if assertion.passed { "PASS" } else { "FAIL" },
            assertion.name,
            assertion.detail
        )?;
    }
    writeln!(
        out,
        "records_csv: {}",
        config.output.records_csv.display()
    )?;
    writeln!(out, "report_json: {}", config.output.report_json.display())?;
    Ok(all_passed)
}

// ---------------------------------------------------------------------------
// Argument definitions
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "nwopt",
    version,
    about = "Kernel-weighted contextual stochastic optimization with finite-sample guarantees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel-regression estimate of the conditional expected loss at a
    /// fixed decision.
    Estimate(EstimateArgs),
    /// Minimize the kernel-regression objective over a tau-net of [0,1].
    Solve(SolveArgs),
    /// Bandwidth balancing the bias and deviation terms at sample size n.
    Bandwidth(BandwidthArgs),
    /// Suboptimality bound (and optionally the fixed-decision deviation
    /// probability) at sample size n.
    Bound(BoundCmdArgs),
    /// Samples sufficient for a target suboptimality gap.
    Complexity(ComplexityArgs),
    /// Run a configured Monte Carlo experiment and write report files.
    Experiment(ExperimentArgs),
    /// Generate a synthetic dataset CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Dataset CSV path (header g1,...,gp,xi1,...,xiq).
    #[arg(long)]
    pub data: PathBuf,
    /// Covariate query, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub query: Vec<f64>,
    /// Decision vector, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    /// Kernel ball radius.
    #[arg(long)]
    pub bandwidth: f64,
    /// Underage unit cost.
    #[arg(long, default_value_t = 1.0)]
    pub cu: f64,
    /// Overage unit cost.
    #[arg(long, default_value_t = 1.0)]
    pub co: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub query: Vec<f64>,
    #[arg(long)]
    pub bandwidth: f64,
    /// Net resolution over the decision interval.
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub co: f64,
    /// Also write the result as JSON.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Covariate dimension p.
    #[arg(long, default_value_t = 1)]
    pub covariate_dim: usize,
    /// Decision dimension d.
    #[arg(long, default_value_t = 1)]
    pub decision_dim: usize,
    /// Diameter D of the feasible set.
    #[arg(long, default_value_t = 1.0)]
    pub diameter: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lipschitz_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lipschitz_gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub density_floor: f64,
    /// Use the scaled covering bound `constant * (D/tau)^d` instead of the
    /// default `(1 + 2D/tau)^d`.
    #[arg(long)]
    pub covering_constant: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub bound: BoundArgs,
}

#[derive(Debug, Args)]
pub struct BoundCmdArgs {
    #[arg(long)]
    pub n: usize,
    /// Evaluate the fixed-decision deviation probability at this bandwidth.
    #[arg(long)]
    pub h: Option<f64>,
    /// Deviation level for the fixed-decision probability (requires --h).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub bound: BoundArgs,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    /// Target suboptimality gap in (0, 1).
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub bound: BoundArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Path to the experiment config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Cap worker-pool parallelism (default: machine core count).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Covariate dimension.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = GeneratorSpec::default_alpha())]
    pub alpha: f64,
    #[arg(long, default_value_t = GeneratorSpec::default_beta())]
    pub beta: f64,
    #[arg(long, default_value_t = GeneratorSpec::default_noise_half_width())]
    pub noise_half_width: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Dispatches a parsed command line and maps the outcome to an exit code:
/// 0 success, 1 failed statistical assertion, 2 error.
pub fn run(cli: &Cli, out: &mut impl Write) -> i32 {
    let outcome = match &cli.command {
        Command::Estimate(args) => cmd_estimate(args, out).map(|_| true),
        Command::Solve(args) => cmd_solve(args, out).map(|_| true),
        Command::Bandwidth(args) => cmd_bandwidth(args, out).map(|_| true),
        Command::Bound(args) => cmd_bound(args, out).map(|_| true),
        Command::Complexity(args) => cmd_complexity(args, out).map(|_| true),
        Command::Experiment(args) => cmd_experiment(args, out),
        Command::Generate(args) => cmd_generate(args, out).map(|_| true),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_round_trip() {
        let gen = GeneratorSpec {
            covariate_dim: 3,
            ..GeneratorSpec::default()
        };
        let data = sample_dataset(&gen, 17, 5).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&data, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("g1,g2,g3,xi1\n"));
        assert!(!text.contains('\r'));
        let parsed = read_dataset_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed, data);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let csv = "g1,xi1\n1.0,2.0\nbroken\n";
        let err = read_dataset_csv(csv.as_bytes()).unwrap_err();
        match err {
            Error::CsvParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_header_is_rejected() {
        let csv = "gamma,xi1\n1.0,2.0\n";
        assert!(matches!(
            read_dataset_csv(csv.as_bytes()),
            Err(Error::CsvParse { line: 1, .. })
        ));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{
            "experiment": "coverage",
            "problem": {"covariate_dim": 1},
            "gamma_query": [0.5],
            "base_seed": 1,
            "output": {"records_csv": "a.csv", "report_json": "a.json"},
            "typo_field": 3
        }"#;
        let err = RunConfig::from_json(text).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn config_requires_experiment_fields() {
        let text = r#"{
            "experiment": "coverage",
            "problem": {"covariate_dim": 1},
            "gamma_query": [0.5],
            "base_seed": 1,
            "output": {"records_csv": "a.csv", "report_json": "a.json"}
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        assert!(matches!(config.execute(), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(
            values in proptest::collection::vec(
                proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL,
                2..40,
            )
        ) {
            let rows: Vec<Vec<f64>> = values.chunks_exact(2).map(|c| c.to_vec()).collect();
            prop_assume!(!rows.is_empty());
            let data = Dataset::from_rows(&rows, 1, 1).unwrap();
            let mut buf = Vec::new();
            write_dataset_csv(&data, &mut buf).unwrap();
            let parsed = read_dataset_csv(buf.as_slice()).unwrap();
            for i in 0..data.n() {
                prop_assert_eq!(
                    parsed.covariate(i)[0].to_bits(),
                    data.covariate(i)[0].to_bits()
                );
                prop_assert_eq!(parsed.outcome(i)[0].to_bits(), data.outcome(i)[0].to_bits());
            }
        }
    }
}
