//! Key-value experiment configuration: file parsing, built-in presets, and
//! the resolved-config echo embedded in every output file.
//!
//! The format is one `key = value` per line; `#` starts a comment; unknown
//! or duplicate keys are errors. Matrices use `;` between rows and
//! whitespace between entries, e.g. `a0 = 0.6 0.5 ; 0 0.4`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::federation::{FederationConfig, LocalSteps, StepSchedule, UpdateRule};
use crate::lti::NoiseSpec;

use super::{DataSpec, EnsembleSpec};

pub const DEFAULT_SEED: u64 = 20230617;

/// Sweep axis: exactly one parameter varies per sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Clients(Vec<usize>),
    Rollouts(Vec<usize>),
    Epsilon(Vec<f64>),
    Rule(Vec<UpdateRule>),
}

/// Everything needed to run a curve or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub data: DataSpec,
    pub federation: FederationConfig,
    /// Independent trials averaged into each curve.
    pub trials: usize,
    pub sweep: Option<SweepAxis>,
    /// Reuse the trial-0 ensemble for every trial.
    pub freeze_ensemble: bool,
    pub seed: u64,
    /// Confidence level for bound and diagnostics reports.
    pub delta: f64,
    /// Whether the step schedule was set explicitly (rule sweeps keep an
    /// explicit schedule; otherwise each rule gets its default).
    pub schedule_explicit: bool,
}

impl ExperimentConfig {
    /// The benchmark defaults: 50 clients, 25 rollouts of horizon 5 each,
    /// unit noise, epsilon 0.01, 10 local steps at step size 1e-4, 200
    /// rounds, 25 trials.
    pub fn benchmark_defaults() -> Self {
        ExperimentConfig {
            ensemble: EnsembleSpec::benchmark(0.01),
            data: DataSpec {
                rollouts_per_client: 25,
                horizon: 5,
                noise: NoiseSpec::unit(),
            },
            federation: FederationConfig {
                clients: 50,
                rounds: 200,
                local_steps: LocalSteps::Uniform(10),
                rule: UpdateRule::FedLin,
                schedule: StepSchedule::Constant(1e-4),
                participation: 1.0,
                seed: DEFAULT_SEED,
                normalize_gradient: false,
            },
            trials: 25,
            sweep: None,
            freeze_ensemble: false,
            seed: DEFAULT_SEED,
            delta: 0.05,
            schedule_explicit: false,
        }
    }

    /// The schedule a rule uses when none is pinned explicitly: constant for
    /// the gradient-corrected rule, linearly decreasing for plain averaging.
    pub fn default_schedule(rule: UpdateRule, alpha0: f64) -> StepSchedule {
        match rule {
            UpdateRule::FedLin => StepSchedule::Constant(alpha0),
            UpdateRule::FedAvg => StepSchedule::LinearDecreasing(alpha0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.data.rollouts_per_client == 0 || self.data.horizon == 0 {
            return Err(Error::Config("rollouts and horizon must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        self.federation.validate()?;
        if let Some(axis) = &self.sweep {
            let empty = match axis {
                SweepAxis::Clients(v) => v.is_empty(),
                SweepAxis::Rollouts(v) => v.is_empty(),
                SweepAxis::Epsilon(v) => v.is_empty(),
                SweepAxis::Rule(v) => v.is_empty(),
            };
            if empty {
                return Err(Error::Config("sweep axis must be non-empty".into()));
            }
        }
        Ok(())
    }

    /// One full config per value of the sweep axis, sweep cleared.
    pub fn sweep_variants(&self, axis: &SweepAxis) -> Result<Vec<ExperimentConfig>> {
        let mut variants = Vec::new();
        match axis {
            SweepAxis::Clients(values) => {
                for &m in values {
                    let mut c = self.clone();
                    c.federation.clients = m;
                    c.sweep = None;
                    variants.push(c);
                }
            }
            SweepAxis::Rollouts(values) => {
                for &n in values {
                    let mut c = self.clone();
                    c.data.rollouts_per_client = n;
                    c.sweep = None;
                    variants.push(c);
                }
            }
            SweepAxis::Epsilon(values) => {
                for &eps in values {
                    let mut c = self.clone();
                    c.ensemble.epsilon = eps;
                    c.sweep = None;
                    variants.push(c);
                }
            }
            SweepAxis::Rule(values) => {
                for &rule in values {
                    let mut c = self.clone();
                    c.federation.rule = rule;
                    if !self.schedule_explicit {
                        c.federation.schedule =
                            Self::default_schedule(rule, self.federation.schedule.alpha0());
                    }
                    c.sweep = None;
                    variants.push(c);
                }
            }
        }
        if variants.is_empty() {
            return Err(Error::Config("sweep axis must be non-empty".into()));
        }
        for v in &variants {
            v.validate()?;
        }
        Ok(variants)
    }

    /// Resolved configuration as `key = value` lines (the echo embedded in
    /// output files).
    pub fn render(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut push = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        push("n", self.ensemble.state_dim.to_string());
        push("p", self.ensemble.input_dim.to_string());
        push("epsilon", format!("{}", self.ensemble.epsilon));
        push("a0", render_matrix(&self.ensemble.nominal_a));
        push("b0", render_matrix(&self.ensemble.nominal_b));
        push("v", render_matrix(&self.ensemble.pattern_a));
        push("u", render_matrix(&self.ensemble.pattern_b));
        push("rollouts", self.data.rollouts_per_client.to_string());
        push("horizon", self.data.horizon.to_string());
        push("sigma_x", format!("{}", self.data.noise.sigma_x));
        push("sigma_u", format!("{}", self.data.noise.sigma_u));
        push("sigma_w", format!("{}", self.data.noise.sigma_w));
        push("clients", self.federation.clients.to_string());
        push("rounds", self.federation.rounds.to_string());
        let steps = match &self.federation.local_steps {
            LocalSteps::Uniform(k) => k.to_string(),
            LocalSteps::PerClient(ks) => ks
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        };
        push("local_steps", steps);
        push("rule", self.federation.rule.to_string());
        let (step_kind, alpha0) = match self.federation.schedule {
            StepSchedule::Constant(a) => ("constant", a),
            StepSchedule::LinearDecreasing(a) => ("linear", a),
        };
        push("step", step_kind.to_string());
        push("alpha0", format!("{alpha0}"));
        push(
            "participation",
            format!("{}", self.federation.participation),
        );
        push(
            "normalize_gradient",
            self.federation.normalize_gradient.to_string(),
        );
        push("trials", self.trials.to_string());
        push("seed", self.seed.to_string());
        push("freeze_ensemble", self.freeze_ensemble.to_string());
        push("delta", format!("{}", self.delta));
        match &self.sweep {
            Some(SweepAxis::Clients(v)) => push("sweep_clients", join_display(v)),
            Some(SweepAxis::Rollouts(v)) => push("sweep_rollouts", join_display(v)),
            Some(SweepAxis::Epsilon(v)) => push("sweep_epsilon", join_display(v)),
            Some(SweepAxis::Rule(v)) => push("sweep_rule", join_display(v)),
            None => {}
        }
        lines
    }
}

fn join_display<T: std::fmt::Display>(values: &[T]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out
}

fn render_matrix(m: &DMatrix<f64>) -> String {
    let mut rows = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        rows.push(row.join(" "));
    }
    rows.join(" ; ")
}

fn parse_matrix(value: &str, key: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = value
        .split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Config(format!("{key}: '{tok}' is not a number")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Config(format!("{key}: empty matrix")));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!("{key}: ragged matrix rows")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(flat.len() / cols, cols, &flat))
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{tok}'")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_bool(value: &str, key: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key}: '{other}' is not a boolean"))),
    }
}

/// Parses a config from text, starting from the benchmark defaults so a file
/// only has to name what it changes.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::benchmark_defaults();
    let mut seen = BTreeSet::new();
    let mut step_kind: Option<String> = None;
    let mut alpha0: Option<f64> = None;
    let mut sweep_keys = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
        match key {
            "n" => config.ensemble.state_dim = parse_scalar(value, key)?,
            "p" => config.ensemble.input_dim = parse_scalar(value, key)?,
            "epsilon" => config.ensemble.epsilon = parse_scalar(value, key)?,
            "a0" => config.ensemble.nominal_a = parse_matrix(value, key)?,
            "b0" => config.ensemble.nominal_b = parse_matrix(value, key)?,
            "v" => config.ensemble.pattern_a = parse_matrix(value, key)?,
            "u" => config.ensemble.pattern_b = parse_matrix(value, key)?,
            "rollouts" => config.data.rollouts_per_client = parse_scalar(value, key)?,
            "horizon" => config.data.horizon = parse_scalar(value, key)?,
            "sigma_x" => config.data.noise.sigma_x = parse_scalar(value, key)?,
            "sigma_u" => config.data.noise.sigma_u = parse_scalar(value, key)?,
            "sigma_w" => config.data.noise.sigma_w = parse_scalar(value, key)?,
            "clients" => config.federation.clients = parse_scalar(value, key)?,
            "rounds" => config.federation.rounds = parse_scalar(value, key)?,
            "local_steps" => {
                let ks: Vec<usize> = parse_list(value, key)?;
                config.federation.local_steps = match ks.as_slice() {
                    [] => return Err(Error::Config("local_steps: empty".into())),
                    [k] => LocalSteps::Uniform(*k),
                    _ => LocalSteps::PerClient(ks),
                };
            }
            "rule" => config.federation.rule = value.parse()?,
            "step" => step_kind = Some(value.to_ascii_lowercase()),
            "alpha0" => alpha0 = Some(parse_scalar(value, key)?),
            "participation" => config.federation.participation = parse_scalar(value, key)?,
            "normalize_gradient" => config.federation.normalize_gradient = parse_bool(value, key)?,
            "trials" => config.trials = parse_scalar(value, key)?,
            "seed" => {
                config.seed = parse_scalar(value, key)?;
                config.federation.seed = config.seed;
            }
            "freeze_ensemble" => config.freeze_ensemble = parse_bool(value, key)?,
            "delta" => config.delta = parse_scalar(value, key)?,
            "sweep_clients" => {
                config.sweep = Some(SweepAxis::Clients(parse_list(value, key)?));
                sweep_keys += 1;
            }
            "sweep_rollouts" => {
                config.sweep = Some(SweepAxis::Rollouts(parse_list(value, key)?));
                sweep_keys += 1;
            }
            "sweep_epsilon" => {
                config.sweep = Some(SweepAxis::Epsilon(parse_list(value, key)?));
                sweep_keys += 1;
            }
            "sweep_rule" => {
                let rules: Vec<UpdateRule> = value
                    .split_whitespace()
                    .map(|tok| tok.parse())
                    .collect::<Result<_>>()?;
                config.sweep = Some(SweepAxis::Rule(rules));
                sweep_keys += 1;
            }
            other => {
                return Err(Error::Config(format!("unknown key '{other}'")));
            }
        }
    }
    if sweep_keys > 1 {
        return Err(Error::Config(
            "at most one sweep axis may be specified".into(),
        ));
    }

    // Resolve the schedule last so it can see the final rule and alpha0.
    let alpha0 = alpha0.unwrap_or_else(|| config.federation.schedule.alpha0());
    config.schedule_explicit = step_kind.is_some();
    config.federation.schedule = match step_kind.as_deref() {
        Some("constant") => StepSchedule::Constant(alpha0),
        Some("linear") => StepSchedule::LinearDecreasing(alpha0),
        Some(other) => {
            return Err(Error::Config(format!(
                "step: expected constant or linear, got '{other}'"
            )))
        }
        None => ExperimentConfig::default_schedule(config.federation.rule, alpha0),
    };

    config.validate()?;
    Ok(config)
}

pub fn read_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Built-in named configurations.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let mut config = ExperimentConfig::benchmark_defaults();
    match name {
        "paper_defaults" | "fig1a_M50" => {}
        "fig1a" => {
            config.sweep = Some(SweepAxis::Clients(vec![1, 10, 50, 100]));
        }
        "fig1b" => {
            config.sweep = Some(SweepAxis::Rollouts(vec![25, 50, 100]));
        }
        "fig1c" => {
            config.sweep = Some(SweepAxis::Epsilon(vec![0.01, 0.1, 1.0]));
        }
        "fig3_compare" => {
            config.sweep = Some(SweepAxis::Rule(vec![
                UpdateRule::FedAvg,
                UpdateRule::FedLin,
            ]));
        }
        _ => return None,
    }
    Some(config)
}

/// Names accepted by `preset`, for error messages.
pub const PRESET_NAMES: &[&str] = &[
    "paper_defaults",
    "fig1a_M50",
    "fig1a",
    "fig1b",
    "fig1c",
    "fig3_compare",
];
