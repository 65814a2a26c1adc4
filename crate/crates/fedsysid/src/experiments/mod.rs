//! End-to-end experiment protocol: heterogeneous ensemble generation, the
//! per-round error-curve metric averaged over independent trials, and
//! parameter sweeps over client count, rollout count, heterogeneity, and the
//! update rule.

pub mod config;
pub mod output;

use nalgebra::DMatrix;

pub use config::{parse_config_str, preset, read_config_file, ExperimentConfig, SweepAxis};
pub use output::{emit_plot_script, read_curves_csv, write_curves_csv};

use crate::error::{Error, Result};
use crate::federation::{run_fedsysid, UpdateRule};
use crate::linalg;
use crate::lti::{simulate_client_dataset, ClientDataset, LtiSystem, NoiseSpec};
use crate::rng::{tags, RngStream};

/// Nominal system plus the low-rank modification patterns and the
/// heterogeneity level applied per client.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub state_dim: usize,
    pub input_dim: usize,
    pub nominal_a: DMatrix<f64>,
    pub nominal_b: DMatrix<f64>,
    pub pattern_a: DMatrix<f64>,
    pub pattern_b: DMatrix<f64>,
    pub epsilon: f64,
}

impl EnsembleSpec {
    /// The benchmark 3-state / 2-input ensemble: upper-triangular nominal A
    /// with diagonal (0.6, 0.4, 0.3), and patterns touching the second and
    /// third state rows and the off-diagonal input columns.
    pub fn benchmark(epsilon: f64) -> Self {
        EnsembleSpec {
            state_dim: 3,
            input_dim: 2,
            nominal_a: DMatrix::from_row_slice(
                3,
                3,
                &[0.6, 0.5, 0.4, 0.0, 0.4, 0.3, 0.0, 0.0, 0.3],
            ),
            nominal_b: DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.5, 1.0, 0.5, 0.5]),
            pattern_a: DMatrix::from_row_slice(
                3,
                3,
                &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ),
            pattern_b: DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = (self.state_dim, self.input_dim);
        if n == 0 || p == 0 {
            return Err(Error::Config("state and input dims must be >= 1".into()));
        }
        let shapes = [
            ("a0", self.nominal_a.shape(), (n, n)),
            ("v", self.pattern_a.shape(), (n, n)),
            ("b0", self.nominal_b.shape(), (n, p)),
            ("u", self.pattern_b.shape(), (n, p)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::Config(format!(
                    "{name} must be {}x{}, got {}x{}",
                    want.0, want.1, got.0, got.1
                )));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Data-collection knobs shared by every client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub rollouts_per_client: usize,
    pub horizon: usize,
    pub noise: NoiseSpec,
}

/// Identifying metadata for one error curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeta {
    pub rule: UpdateRule,
    pub clients: usize,
    pub rollouts_per_client: usize,
    pub epsilon: f64,
}

/// Mean spectral distance to the reference client's true parameters, per
/// round, averaged over independent trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub rounds: Vec<usize>,
    pub e_r: Vec<f64>,
    /// Per-round sample standard deviation across trials (0 for one trial).
    pub std: Vec<f64>,
    pub meta: CurveMeta,
}

impl ErrorCurve {
    pub fn final_error(&self) -> f64 {
        *self.e_r.last().expect("curves are never empty")
    }
}

/// Draws `clients` systems around the nominal: each client perturbs A and B
/// along the patterns by independent amplitudes uniform in (0, epsilon).
/// Client 0 serves as the reference for the error metric.
pub fn make_ensemble(
    spec: &EnsembleSpec,
    clients: usize,
    rng: &mut RngStream,
) -> Result<Vec<LtiSystem>> {
    spec.validate()?;
    if clients == 0 {
        return Err(Error::InvalidArgument("need at least one client".into()));
    }
    let mut systems = Vec::with_capacity(clients);
    for _ in 0..clients {
        let gamma_a = rng.uniform(spec.epsilon);
        let gamma_b = rng.uniform(spec.epsilon);
        let a = &spec.nominal_a + &spec.pattern_a * gamma_a;
        let b = &spec.nominal_b + &spec.pattern_b * gamma_b;
        systems.push(LtiSystem::new(a, b)?);
    }
    Ok(systems)
}

/// Ensemble and per-client datasets for one trial, derived from the
/// config's master seed. Stream layout: trial t forks `TRIAL -> t`; the
/// ensemble uses its `ENSEMBLE` fork (or the master's, when frozen); client
/// i's data comes from `CLIENT -> i`.
pub fn trial_data(
    config: &ExperimentConfig,
    trial: usize,
) -> Result<(Vec<LtiSystem>, Vec<ClientDataset>)> {
    let clients = config.federation.clients;
    let data = config.data;
    let master = RngStream::from_seed(config.seed);
    let trial_stream = master.fork(tags::TRIAL).fork(trial as u64);
    let mut ensemble_rng = if config.freeze_ensemble {
        master.fork(tags::ENSEMBLE)
    } else {
        trial_stream.fork(tags::ENSEMBLE)
    };
    let systems = make_ensemble(&config.ensemble, clients, &mut ensemble_rng)?;
    let client_root = trial_stream.fork(tags::CLIENT);
    let datasets = systems
        .iter()
        .enumerate()
        .map(|(i, sys)| {
            simulate_client_dataset(
                sys,
                &data.noise,
                data.rollouts_per_client,
                data.horizon,
                i,
                &client_root.fork(i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((systems, datasets))
}

/// Per-trial federation seed, also derived from the trial stream.
fn trial_federation_seed(config: &ExperimentConfig, trial: usize) -> u64 {
    RngStream::from_seed(config.seed)
        .fork(tags::TRIAL)
        .fork(trial as u64)
        .fork(tags::FEDERATION)
        .key()
}

/// Runs `trials` independent federated runs and averages the per-round
/// spectral distance to the reference client's true parameters.
pub fn run_error_curve(config: &ExperimentConfig) -> Result<ErrorCurve> {
    config.validate()?;
    let fed = &config.federation;
    let rounds = fed.rounds;
    let mut per_round: Vec<Vec<f64>> = vec![Vec::with_capacity(config.trials); rounds + 1];

    for trial in 0..config.trials {
        let wrap = |e: Error| Error::Trial {
            trial,
            source: Box::new(e),
        };
        let (systems, datasets) = trial_data(config, trial).map_err(wrap)?;
        let mut fed_config = fed.clone();
        fed_config.seed = trial_federation_seed(config, trial);
        let theta_0 = DMatrix::zeros(
            config.ensemble.state_dim,
            config.ensemble.state_dim + config.ensemble.input_dim,
        );
        let (_, trace) = run_fedsysid(&datasets, &fed_config, &theta_0, None).map_err(wrap)?;
        let reference = systems[0].theta();
        for (r, entry) in trace.iter().enumerate() {
            per_round[r].push(linalg::spectral_norm(&(&entry.theta - &reference)));
        }
    }

    let mut e_r = Vec::with_capacity(rounds + 1);
    let mut std = Vec::with_capacity(rounds + 1);
    for samples in &per_round {
        let q = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / q;
        let var = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (q - 1.0)
        } else {
            0.0
        };
        e_r.push(mean);
        std.push(var.sqrt());
    }
    Ok(ErrorCurve {
        rounds: (0..=rounds).collect(),
        e_r,
        std,
        meta: CurveMeta {
            rule: fed.rule,
            clients: fed.clients,
            rollouts_per_client: config.data.rollouts_per_client,
            epsilon: config.ensemble.epsilon,
        },
    })
}

/// Runs one curve per value of the configured sweep axis. Every curve reuses
/// the same master seed, so curves differ only through the swept parameter.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ErrorCurve>> {
    config.validate()?;
    let axis = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep requires a sweep_* axis".into()))?;
    let variants = config.sweep_variants(axis)?;
    variants.iter().map(run_error_curve).collect()
}
