//! Command-line front end.
//!
//! Every command reads a JSON [`RunConfig`], validates the fields it needs,
//! and writes either CSV or JSON. Exit statuses: 0 success, 1 validation
//! error, 2 domain error, 3 failed experiment verdict.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::distributions::{DistributionSpec, ParetoTail};
use crate::error::Error;
use crate::experiments::{self, SweepTable};
use crate::output::{self, Cell, Table};
use crate::propagation::{error_band, BetaErrorModel, Pushforward};
use crate::rng::Seed;
use crate::tail_measures::{partial_expectation, tail_decomposition, ImpactFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERDICT_FAIL: i32 = 3;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eval,
    Decompose,
    Propagate,
    Band,
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKey {
    Skewness,
    Pit,
    Clt,
    Nonconvergence,
    Amplification,
}

/// Contents of a `--config` file. Unknown fields are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub distribution: Option<DistributionSpec>,
    pub beta: Option<BetaErrorModel>,
    pub pareto_tail: Option<ParetoTail>,
    pub impact: Option<ImpactFunction>,
    pub thresholds: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub p_halfwidth: Option<f64>,
    pub alpha_list: Option<Vec<f64>>,
    pub sigma_grid: Option<Vec<f64>>,
    pub checkpoints: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub replications: Option<usize>,
    pub bets: Option<usize>,
    pub experiment: Option<ExperimentKey>,
    /// Runs the Beta(2,2) negative control instead of the transformed sample
    /// in the `pit` experiment.
    pub control: Option<bool>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<OutputFormat>,
}

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Validation(String),
    Domain(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) | RunError::Io(_) => EXIT_VALIDATION,
            RunError::Domain(_) => EXIT_DOMAIN,
        }
    }

    /// Single-line JSON diagnostic.
    pub fn to_json_line(&self) -> String {
        let (kind, message) = match self {
            RunError::Validation(m) => ("validation", m),
            RunError::Domain(m) => ("domain", m),
            RunError::Io(m) => ("io", m),
        };
        json!({"error": kind, "message": message}).to_string()
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => RunError::Validation(e.to_string()),
            _ => RunError::Domain(e.to_string()),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub contents: String,
    pub path: Option<PathBuf>,
    /// Set for experiments; a failed verdict maps to exit status 3.
    pub verdict: Option<experiments::Verdict>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        match &self.verdict {
            Some(v) if !v.pass => EXIT_VERDICT_FAIL,
            _ => EXIT_OK,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    serde_json::from_str(text).map_err(|e| RunError::Validation(format!("invalid config: {e}")))
}

fn require<'a, T>(field: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, RunError> {
    field
        .as_ref()
        .ok_or_else(|| RunError::Validation(format!("`{command}` requires field `{name}`")))
}

fn nonempty<'a>(v: &'a [f64], name: &str) -> Result<&'a [f64], RunError> {
    if v.is_empty() {
        Err(RunError::Validation(format!("`{name}` must not be empty")))
    } else {
        Ok(v)
    }
}

struct Rendered {
    table: Table,
    json: serde_json::Value,
    verdict: Option<experiments::Verdict>,
}

/// Runs `command` and returns its rendered output without writing it.
pub fn execute(command: Command, config: &RunConfig, overrides: &Overrides) -> Result<RunOutput, RunError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(RunError::Validation(format!(
                "config is for command `{}`, invoked as `{}`",
                command_name(c),
                command_name(command)
            )));
        }
    }
    let seed = Seed(overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    let format = overrides.format.or(config.output_format).unwrap_or_default();
    let rendered = match command {
        Command::Eval => eval(config)?,
        Command::Decompose => decompose(config)?,
        Command::Propagate => propagate(config, seed)?,
        Command::Band => band(config)?,
        Command::Experiment => experiment(config, seed)?,
    };
    let contents = match format {
        OutputFormat::Csv => rendered.table.to_csv(),
        OutputFormat::Json => output::to_json_string(rendered.json),
    };
    Ok(RunOutput {
        contents,
        path: overrides.out.clone().or_else(|| config.output_path.clone()),
        verdict: rendered.verdict,
    })
}

/// Runs a command end to end: executes, writes the output atomically (or to
/// stdout when no path is set), and returns the exit status.
pub fn run(command: Command, config: &RunConfig, overrides: &Overrides) -> Result<i32, RunError> {
    let out = execute(command, config, overrides)?;
    match &out.path {
        Some(path) => output::write_atomic(path, &out.contents)
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", out.contents),
    }
    if let Some(v) = &out.verdict {
        if !v.pass {
            eprintln!("{}", json!({"verdict": "fail", "reason": v.reason}));
        }
    }
    Ok(out.exit_code())
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Eval => "eval",
        Command::Decompose => "decompose",
        Command::Propagate => "propagate",
        Command::Band => "band",
        Command::Experiment => "experiment",
    }
}

fn eval(config: &RunConfig) -> Result<Rendered, RunError> {
    let spec = require(&config.distribution, "distribution", "eval")?;
    let impact = config.impact.unwrap_or(ImpactFunction::Identity);
    if config.thresholds.is_none() && config.p_grid.is_none() {
        return Err(RunError::Validation("`eval` requires `thresholds` or `p_grid`".into()));
    }
    let mut points: Vec<(Option<f64>, f64)> = config
        .thresholds
        .iter()
        .flatten()
        .map(|&k| (None, k))
        .collect();
    for &p in config.p_grid.iter().flatten() {
        points.push((Some(p), spec.inverse_survival(p)?));
    }
    let mut table = Table::new(&["p", "K", "density", "survival", "partial_expectation"]);
    let mut rows = Vec::new();
    for (p, k) in points {
        let survival = spec.survival(k);
        let density = spec.density(k);
        let g = partial_expectation(spec, k, impact)?;
        table.push(vec![
            p.map_or(Cell::Text(String::new()), Cell::Num),
            Cell::Num(k),
            Cell::Num(density),
            Cell::Num(survival),
            Cell::Ext(g),
        ]);
        rows.push(json!({
            "p": p, "K": k, "density": density, "survival": survival, "partial_expectation": g,
        }));
    }
    Ok(Rendered {
        table,
        json: json!({"distribution": spec, "impact": impact, "rows": rows}),
        verdict: None,
    })
}

fn decompose(config: &RunConfig) -> Result<Rendered, RunError> {
    let spec = require(&config.distribution, "distribution", "decompose")?;
    let ks = nonempty(require(&config.thresholds, "thresholds", "decompose")?, "thresholds")?;
    let mut table = Table::new(&["K", "threshold_term", "integral_term", "total", "quadrature_error"]);
    let mut rows = Vec::new();
    for &k in ks {
        let d = tail_decomposition(spec, k)?;
        table.push(vec![
            Cell::Num(k),
            Cell::Num(d.threshold_term),
            Cell::Num(d.integral_term),
            Cell::Num(d.total),
            Cell::Num(d.quadrature_error),
        ]);
        rows.push(json!({
            "K": k,
            "threshold_term": d.threshold_term,
            "integral_term": d.integral_term,
            "total": d.total,
            "quadrature_error": d.quadrature_error,
        }));
    }
    Ok(Rendered {
        table,
        json: json!({"distribution": spec, "rows": rows}),
        verdict: None,
    })
}

fn propagate(config: &RunConfig, seed: Seed) -> Result<Rendered, RunError> {
    let model = require(&config.beta, "beta", "propagate")?;
    let tail = require(&config.pareto_tail, "pareto_tail", "propagate")?;
    let n = config.samples.unwrap_or(1_000_000);
    let result = Pushforward::new(*model, tail.scale, tail.tail_index)?.sample(seed, n)?;
    let mut columns = vec![
        "mean",
        "variance",
        "mc_mean",
        "mc_mean_ci_halfwidth",
        "mc_variance",
        "mc_n",
        "mc_reliable",
    ];
    let flag_names: Vec<String> = result.moment_flags.iter().map(|f| format!("moment_{}_exists", f.n)).collect();
    columns.extend(flag_names.iter().map(String::as_str));
    let mut table = Table::new(&columns);
    let mut row = vec![
        Cell::Ext(result.mean),
        Cell::Ext(result.variance),
        Cell::Num(result.mc_mean),
        Cell::Num(result.mc_mean_ci_halfwidth),
        Cell::Num(result.mc_variance),
        Cell::Int(result.mc_n),
        Cell::Text(result.mc_reliable.to_string()),
    ];
    row.extend(result.moment_flags.iter().map(|f| Cell::Text(f.exists.to_string())));
    table.push(row);
    Ok(Rendered {
        table,
        json: serde_json::to_value(&result).expect("serializable"),
        verdict: None,
    })
}

fn band(config: &RunConfig) -> Result<Rendered, RunError> {
    let tail = require(&config.pareto_tail, "pareto_tail", "band")?;
    let ps = nonempty(require(&config.p_grid, "p_grid", "band")?, "p_grid")?;
    let hw = *require(&config.p_halfwidth, "p_halfwidth", "band")?;
    let mut table = Table::new(&["p_center", "p_halfwidth", "k_low", "k_center", "k_high"]);
    let mut rows = Vec::new();
    for &p in ps {
        let b = error_band(tail.scale, tail.tail_index, p, hw)?;
        table.push(vec![
            Cell::Num(p),
            Cell::Num(hw),
            Cell::Num(b.k_low),
            Cell::Num(b.k_center),
            Cell::Num(b.k_high),
        ]);
        rows.push(json!({
            "p_center": p, "p_halfwidth": hw, "k_low": b.k_low, "k_center": b.k_center, "k_high": b.k_high,
        }));
    }
    Ok(Rendered {
        table,
        json: json!({"pareto_tail": tail, "rows": rows}),
        verdict: None,
    })
}

fn experiment(config: &RunConfig, seed: Seed) -> Result<Rendered, RunError> {
    let key = require(&config.experiment, "experiment", "experiment")?;
    let table: SweepTable = match key {
        ExperimentKey::Skewness => {
            let k = *require(&config.threshold, "threshold", "experiment skewness")?;
            let grid = require(&config.sigma_grid, "sigma_grid", "experiment skewness")?;
            experiments::skewness_sweep(k, grid)?
        }
        ExperimentKey::Pit => {
            let n = config.samples.unwrap_or(100_000);
            if config.control.unwrap_or(false) {
                experiments::pit_control(seed, n)?
            } else {
                let spec = require(&config.distribution, "distribution", "experiment pit")?;
                experiments::pit_check(spec, seed, n)?
            }
        }
        ExperimentKey::Clt => {
            let model = config.beta.unwrap_or_else(BetaErrorModel::uniform);
            let m = config.bets.unwrap_or(30);
            let reps = config.replications.unwrap_or(100_000);
            experiments::sum_of_bets(&model, m, seed, reps)?
        }
        ExperimentKey::Nonconvergence => {
            let tail = require(&config.pareto_tail, "pareto_tail", "experiment nonconvergence")?;
            let checkpoints = config
                .checkpoints
                .clone()
                .unwrap_or_else(|| vec![1_000, 10_000, 100_000, 1_000_000]);
            let reps = config.replications.unwrap_or(50);
            experiments::nonconvergence_demo(tail.tail_index, tail.scale, &checkpoints, seed, reps)?
        }
        ExperimentKey::Amplification => {
            let l = config.pareto_tail.map_or(1.0, |t| t.scale);
            let alphas = require(&config.alpha_list, "alpha_list", "experiment amplification")?;
            let ps = require(&config.p_grid, "p_grid", "experiment amplification")?;
            experiments::amplification_curve(l, alphas, ps)?
        }
    };
    Ok(Rendered {
        table: Table::from(&table),
        json: serde_json::to_value(&table).expect("serializable"),
        verdict: Some(table.verdict),
    })
}
