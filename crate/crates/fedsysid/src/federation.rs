//! The federated meta-algorithm: broadcast, local client updates (plain
//! gradient steps or gradient-corrected steps), and server averaging.
//!
//! Both client rules run on the normal-equation form of the local gradient,
//! `(X - Theta Z) Z^T = X Z^T - Theta (Z Z^T)`, with the per-client Gram and
//! cross products computed once per dataset.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{estimation_error, pooled_ls, ThetaEstimate};
use crate::linalg;
use crate::lti::{ClientDataset, LtiSystem};
use crate::rng::{derive_key, tags, RngStream};

/// Iterate-norm blowup factor that aborts a local update.
const DIVERGENCE_GUARD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateRule {
    FedAvg,
    FedLin,
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateRule::FedAvg => write!(f, "fedavg"),
            UpdateRule::FedLin => write!(f, "fedlin"),
        }
    }
}

impl FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fedavg" => Ok(UpdateRule::FedAvg),
            "fedlin" => Ok(UpdateRule::FedLin),
            other => Err(Error::Config(format!(
                "unknown update rule '{other}' (expected fedavg or fedlin)"
            ))),
        }
    }
}

/// Server step-size schedule over rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// alpha_r = alpha0 * (1 - r/R), floored at alpha0 / R.
    LinearDecreasing(f64),
}

impl StepSchedule {
    pub fn alpha0(&self) -> f64 {
        match *self {
            StepSchedule::Constant(a) | StepSchedule::LinearDecreasing(a) => a,
        }
    }

    pub fn step(&self, round: usize, total_rounds: usize) -> f64 {
        match *self {
            StepSchedule::Constant(a) => a,
            StepSchedule::LinearDecreasing(a) => {
                let r = total_rounds.max(1) as f64;
                (a * (1.0 - round as f64 / r)).max(a / r)
            }
        }
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Constant(a) => write!(f, "constant {a}"),
            StepSchedule::LinearDecreasing(a) => write!(f, "linear {a}"),
        }
    }
}

/// Local step counts, uniform or per client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalSteps {
    Uniform(usize),
    PerClient(Vec<usize>),
}

impl LocalSteps {
    pub fn for_client(&self, client: usize) -> usize {
        match self {
            LocalSteps::Uniform(k) => *k,
            LocalSteps::PerClient(ks) => ks[client],
        }
    }

    fn validate(&self, clients: usize) -> Result<()> {
        match self {
            LocalSteps::Uniform(k) if *k >= 1 => Ok(()),
            LocalSteps::Uniform(k) => {
                Err(Error::Config(format!("local steps must be >= 1, got {k}")))
            }
            LocalSteps::PerClient(ks) => {
                if ks.len() != clients {
                    return Err(Error::Config(format!(
                        "per-client step list has {} entries for {clients} clients",
                        ks.len()
                    )));
                }
                if ks.contains(&0) {
                    return Err(Error::Config("every K_i must be >= 1".into()));
                }
                Ok(())
            }
        }
    }
}

/// All knobs of one federated run.
#[derive(Debug, Clone, PartialEq)]
pub struct FederationConfig {
    pub clients: usize,
    pub rounds: usize,
    pub local_steps: LocalSteps,
    pub rule: UpdateRule,
    pub schedule: StepSchedule,
    /// Fraction of clients sampled per round, in (0, 1].
    pub participation: f64,
    pub seed: u64,
    /// When set, local gradients are divided by the client's column count.
    pub normalize_gradient: bool,
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clients == 0 {
            return Err(Error::Config("need at least one client".into()));
        }
        self.local_steps.validate(self.clients)?;
        if !(self.schedule.alpha0() > 0.0 && self.schedule.alpha0().is_finite()) {
            return Err(Error::Config(format!(
                "alpha0 must be positive and finite, got {}",
                self.schedule.alpha0()
            )));
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return Err(Error::Config(format!(
                "participation must be in (0, 1], got {}",
                self.participation
            )));
        }
        if self.participants_per_round() < 1 {
            return Err(Error::Config(format!(
                "participation {} of {} clients rounds to zero participants",
                self.participation, self.clients
            )));
        }
        Ok(())
    }

    pub fn participants_per_round(&self) -> usize {
        ((self.participation * self.clients as f64).round() as usize).min(self.clients)
    }
}

/// Snapshot of the global model before round `round` executes.
#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub round: usize,
    pub theta: DMatrix<f64>,
    /// Spectral distance to the pooled least-squares solution.
    pub residual_to_pooled: f64,
    /// err_max against each client's true system (empty when truths are not
    /// supplied).
    pub per_client_err_max: Vec<f64>,
    /// The set sampled for this round; empty for the final snapshot.
    pub participants: Vec<usize>,
}

/// Uniform sample of `round(participation * clients)` distinct clients,
/// deterministic in `(seed, round)`.
pub fn sample_participants(
    clients: usize,
    participation: f64,
    round: usize,
    seed: u64,
) -> Vec<usize> {
    let k = ((participation * clients as f64).round() as usize)
        .min(clients)
        .max(1);
    let key = derive_key(derive_key(seed, tags::PARTICIPATION), round as u64);
    RngStream::from_seed(key).sample_without_replacement(clients, k)
}

struct ClientWorkspace {
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    scale: f64,
}

impl ClientWorkspace {
    fn new(ds: &ClientDataset, normalize: bool) -> Self {
        ClientWorkspace {
            gram: ds.gram(),
            cross: ds.cross(),
            scale: if normalize {
                1.0 / ds.cols() as f64
            } else {
                1.0
            },
        }
    }

    /// The (optionally normalized) local gradient `(X - Theta Z) Z^T`.
    fn gradient(&self, theta: &DMatrix<f64>) -> DMatrix<f64> {
        (&self.cross - theta * &self.gram) * self.scale
    }
}

/// Correction added to every local step: for gradient-corrected updates this
/// is the pair (local gradient at the broadcast model, global gradient).
enum StepCorrection<'a> {
    None,
    Linearized {
        grad_at_broadcast: &'a DMatrix<f64>,
        global_gradient: &'a DMatrix<f64>,
    },
}

fn descent_steps(
    ws: &ClientWorkspace,
    theta_in: &DMatrix<f64>,
    steps: usize,
    alpha: f64,
    correction: StepCorrection<'_>,
) -> Result<DMatrix<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "need at least one local step".into(),
        ));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be finite and >= 0, got {alpha}"
        )));
    }
    let limit = DIVERGENCE_GUARD * (1.0 + theta_in.norm());
    let mut theta = theta_in.clone();
    for step in 1..=steps {
        let grad = ws.gradient(&theta);
        // The grouping (grad - grad_at_broadcast) + g keeps the correction an
        // exact zero when the local and broadcast gradients are bitwise equal.
        let direction = match correction {
            StepCorrection::None => grad,
            StepCorrection::Linearized {
                grad_at_broadcast,
                global_gradient,
            } => (grad - grad_at_broadcast) + global_gradient,
        };
        theta += direction * alpha;
        let norm = theta.norm();
        if !norm.is_finite() || norm > limit {
            return Err(Error::Divergence {
                theta_norm: norm,
                limit,
                steps: step,
            });
        }
    }
    Ok(theta)
}

/// `steps` plain gradient iterations on the local least-squares loss,
/// starting from `theta_in`.
pub fn fedavg_local(
    dataset: &ClientDataset,
    theta_in: &DMatrix<f64>,
    steps: usize,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    let ws = ClientWorkspace::new(dataset, false);
    descent_steps(&ws, theta_in, steps, alpha, StepCorrection::None)
}

/// The global objective's negative gradient at `theta_bar`:
/// `(1/M) sum_i (X_i - Theta Z_i) Z_i^T`.
pub fn global_gradient(
    datasets: &[ClientDataset],
    theta_bar: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("need at least one dataset".into()));
    }
    let grads: Vec<DMatrix<f64>> = datasets
        .iter()
        .map(|ds| ClientWorkspace::new(ds, false).gradient(theta_bar))
        .collect();
    Ok(linalg::running_mean(grads.iter()).expect("non-empty"))
}

/// `steps` gradient-corrected iterations: each step adds
/// `alpha * [(X - Theta Z) Z^T - (X - theta_bar Z) Z^T + g]`.
pub fn fedlin_local(
    dataset: &ClientDataset,
    theta_in: &DMatrix<f64>,
    theta_bar: &DMatrix<f64>,
    global_grad: &DMatrix<f64>,
    steps: usize,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    let ws = ClientWorkspace::new(dataset, false);
    let grad_at_broadcast = ws.gradient(theta_bar);
    descent_steps(
        &ws,
        theta_in,
        steps,
        alpha,
        StepCorrection::Linearized {
            grad_at_broadcast: &grad_at_broadcast,
            global_gradient: global_grad,
        },
    )
}

/// Largest stable constant step for plain gradient descent on this client's
/// loss: `2 / lambda_max(Z Z^T)`.
pub fn admissible_step_limit(dataset: &ClientDataset) -> f64 {
    let (_, lambda_max) = linalg::sym_eigen_bounds(&dataset.gram());
    2.0 / lambda_max
}

/// Runs the full federated loop and returns the final model plus one trace
/// entry per round boundary (R+1 entries).
///
/// Aggregation averages over all clients with non-participants contributing
/// the broadcast model, matching a server that keeps the last known model
/// for silent clients. The global gradient for corrected updates is formed
/// from all clients at the current broadcast model.
pub fn run_fedsysid(
    datasets: &[ClientDataset],
    config: &FederationConfig,
    theta_0: &DMatrix<f64>,
    truths: Option<&[LtiSystem]>,
) -> Result<(DMatrix<f64>, Vec<RoundTrace>)> {
    config.validate()?;
    if datasets.len() != config.clients {
        return Err(Error::Config(format!(
            "config names {} clients but {} datasets were supplied",
            config.clients,
            datasets.len()
        )));
    }
    if let Some(truths) = truths {
        if truths.len() != datasets.len() {
            return Err(Error::Config(format!(
                "{} truth systems for {} datasets",
                truths.len(),
                datasets.len()
            )));
        }
    }
    let n = datasets[0].state_dim();
    let p = datasets[0].input_dim();
    if theta_0.shape() != (n, p + n) {
        return Err(Error::DimensionMismatch(format!(
            "theta_0 must be {}x{}, got {}x{}",
            n,
            n + p,
            theta_0.nrows(),
            theta_0.ncols()
        )));
    }

    let pooled = pooled_ls(datasets)?;
    let workspaces: Vec<ClientWorkspace> = datasets
        .iter()
        .map(|ds| ClientWorkspace::new(ds, config.normalize_gradient))
        .collect();

    let record = |round: usize, theta: &DMatrix<f64>, participants: Vec<usize>| -> RoundTrace {
        let per_client_err_max = truths
            .map(|truths| {
                let est = ThetaEstimate::new(theta.clone(), n, p).expect("validated shape");
                truths
                    .iter()
                    .map(|sys| estimation_error(&est, sys).expect("validated dims").err_max)
                    .collect()
            })
            .unwrap_or_default();
        RoundTrace {
            round,
            theta: theta.clone(),
            residual_to_pooled: linalg::spectral_norm(&(theta - pooled.theta())),
            per_client_err_max,
            participants,
        }
    };

    let mut theta = theta_0.clone();
    let mut trace = Vec::with_capacity(config.rounds + 1);
    for round in 0..config.rounds {
        let participants =
            sample_participants(config.clients, config.participation, round, config.seed);
        trace.push(record(round, &theta, participants.clone()));

        let alpha = config.schedule.step(round, config.rounds);
        let global_grad = match config.rule {
            UpdateRule::FedLin => {
                let grads: Vec<DMatrix<f64>> =
                    workspaces.iter().map(|ws| ws.gradient(&theta)).collect();
                Some(linalg::running_mean(grads.iter()).expect("non-empty"))
            }
            UpdateRule::FedAvg => None,
        };

        let mut updated: Vec<Option<DMatrix<f64>>> = vec![None; config.clients];
        for &i in &participants {
            let steps = config.local_steps.for_client(i);
            let out = match &global_grad {
                Some(g) => {
                    let grad_at_broadcast = workspaces[i].gradient(&theta);
                    descent_steps(
                        &workspaces[i],
                        &theta,
                        steps,
                        alpha,
                        StepCorrection::Linearized {
                            grad_at_broadcast: &grad_at_broadcast,
                            global_gradient: g,
                        },
                    )
                }
                None => descent_steps(&workspaces[i], &theta, steps, alpha, StepCorrection::None),
            }
            .map_err(|e| Error::ClientUpdate {
                client: i,
                round,
                source: Box::new(e),
            })?;
            updated[i] = Some(out);
        }

        let items = updated.iter().map(|u| u.as_ref().unwrap_or(&theta));
        theta = linalg::running_mean(items).expect("at least one client");
    }
    trace.push(record(config.rounds, &theta, Vec::new()));
    Ok((theta, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ls_estimate;
    use crate::lti::{benchmark_system, simulate_client_dataset, NoiseSpec};

    fn seeded_dataset(seed: u64, rollouts: usize, id: usize) -> ClientDataset {
        let rng = RngStream::from_seed(seed);
        simulate_client_dataset(
            &benchmark_system(),
            &NoiseSpec::unit(),
            rollouts,
            5,
            id,
            &rng,
        )
        .unwrap()
    }

    fn seeded_datasets(seed: u64, clients: usize, rollouts: usize) -> Vec<ClientDataset> {
        (0..clients)
            .map(|i| seeded_dataset(seed + 1000 * i as u64, rollouts, i))
            .collect()
    }

    fn base_config(clients: usize, rule: UpdateRule) -> FederationConfig {
        FederationConfig {
            clients,
            rounds: 20,
            local_steps: LocalSteps::Uniform(10),
            rule,
            schedule: StepSchedule::Constant(1e-4),
            participation: 1.0,
            seed: 7,
            normalize_gradient: false,
        }
    }

    #[test]
    fn full_participation_samples_everyone() {
        let s = sample_participants(12, 1.0, 5, 3);
        assert_eq!(s, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn single_client_is_always_sampled() {
        for round in 0..10 {
            assert_eq!(sample_participants(1, 1.0, round, 99), vec![0]);
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed_and_round() {
        assert_eq!(
            sample_participants(50, 0.5, 3, 11),
            sample_participants(50, 0.5, 3, 11)
        );
        assert_ne!(
            sample_participants(50, 0.5, 3, 11),
            sample_participants(50, 0.5, 4, 11)
        );
    }

    #[test]
    fn sampling_frequencies_are_uniform() {
        let clients = 50;
        let rounds = 10_000;
        let mut counts = vec![0usize; clients];
        for r in 0..rounds {
            let s = sample_participants(clients, 0.5, r, 42);
            assert_eq!(s.len(), 25);
            for i in s {
                counts[i] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / rounds as f64;
            assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn zero_step_size_is_the_identity() {
        let ds = seeded_dataset(40, 10, 0);
        let theta = DMatrix::from_fn(3, 5, |i, j| (i + 2 * j) as f64 * 0.1);
        let out = fedavg_local(&ds, &theta, 5, 0.0).unwrap();
        assert_eq!(out, theta);
    }

    #[test]
    fn one_step_matches_hand_assembled_product() {
        let ds = seeded_dataset(41, 10, 0);
        let theta = DMatrix::from_fn(3, 5, |i, j| ((i * 5 + j) as f64).sin());
        let alpha = 1e-4;
        let out = fedavg_local(&ds, &theta, 1, alpha).unwrap();
        // Literal form of the update, assembled from the raw matrices.
        let expected = &theta + (ds.x() - &theta * ds.z()) * ds.z().transpose() * alpha;
        let rel = (out - &expected).norm() / expected.norm();
        assert!(rel < 1e-12, "relative gap {rel}");
    }

    #[test]
    fn many_small_steps_converge_to_local_ls() {
        let ds = seeded_dataset(42, 25, 0);
        let alpha = 0.5 * admissible_step_limit(&ds);
        let theta0 = DMatrix::zeros(3, 5);
        let out = fedavg_local(&ds, &theta0, 10_000, alpha).unwrap();
        let ls = ls_estimate(ds.x(), ds.z()).unwrap();
        assert!((out - ls.theta()).norm() < 1e-6);
    }

    #[test]
    fn oversized_step_triggers_the_divergence_guard() {
        let ds = seeded_dataset(43, 25, 0);
        let alpha = 10.0 * admissible_step_limit(&ds);
        let theta0 = DMatrix::zeros(3, 5);
        match fedavg_local(&ds, &theta0, 500, alpha) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn global_gradient_vanishes_at_pooled_solution() {
        let datasets = seeded_datasets(50, 3, 15);
        let pooled = pooled_ls(&datasets).unwrap();
        let g = global_gradient(&datasets, pooled.theta()).unwrap();
        let scale: f64 = datasets
            .iter()
            .map(|d| d.x().norm() * d.z().norm())
            .sum::<f64>()
            / datasets.len() as f64;
        assert!(
            g.norm() <= 1e-8 * scale,
            "gradient {} vs scale {scale}",
            g.norm()
        );
    }

    #[test]
    fn global_gradient_of_one_client_is_the_local_direction() {
        let ds = seeded_dataset(51, 10, 0);
        let theta = DMatrix::from_fn(3, 5, |i, j| 0.2 * (i as f64) - 0.1 * (j as f64));
        let g = global_gradient(std::slice::from_ref(&ds), &theta).unwrap();
        let local = ds.cross() - &theta * ds.gram();
        assert_eq!(g, local);
    }

    #[test]
    fn global_gradient_averages_local_components() {
        let datasets = seeded_datasets(52, 2, 10);
        let theta = DMatrix::from_fn(3, 5, |i, j| ((i + j) as f64) * 0.05);
        let g = global_gradient(&datasets, &theta).unwrap();
        let g0 = datasets[0].cross() - &theta * datasets[0].gram();
        let g1 = datasets[1].cross() - &theta * datasets[1].gram();
        assert!((g - (g0 + g1) * 0.5).amax() < 1e-12);
    }

    #[test]
    fn corrected_single_step_is_exactly_the_global_direction() {
        let datasets = seeded_datasets(53, 3, 10);
        let theta_bar = DMatrix::from_fn(3, 5, |i, j| 0.1 * ((i * j) as f64).cos());
        let g = global_gradient(&datasets, &theta_bar).unwrap();
        let alpha = 2e-4;
        let out = fedlin_local(&datasets[0], &theta_bar, &theta_bar, &g, 1, alpha).unwrap();
        // The local terms cancel bitwise at Theta = theta_bar.
        assert_eq!(out, &theta_bar + &g * alpha);
    }

    #[test]
    fn corrected_updates_hold_the_pooled_solution_fixed() {
        let datasets = seeded_datasets(54, 3, 15);
        let pooled = pooled_ls(&datasets).unwrap();
        let g = global_gradient(&datasets, pooled.theta()).unwrap();
        for ds in &datasets {
            let out = fedlin_local(ds, pooled.theta(), pooled.theta(), &g, 25, 1e-3).unwrap();
            assert!((out - pooled.theta()).norm() < 1e-10);
        }
    }

    #[test]
    fn corrected_update_of_single_client_matches_plain_descent() {
        let ds = seeded_dataset(55, 20, 0);
        let theta_bar = DMatrix::zeros(3, 5);
        let g = global_gradient(std::slice::from_ref(&ds), &theta_bar).unwrap();
        let avg = fedavg_local(&ds, &theta_bar, 10, 1e-4).unwrap();
        let lin = fedlin_local(&ds, &theta_bar, &theta_bar, &g, 10, 1e-4).unwrap();
        assert!((avg - lin).amax() <= 1e-12);
    }

    #[test]
    fn zero_rounds_returns_the_initial_model() {
        let datasets = seeded_datasets(60, 2, 10);
        let mut config = base_config(2, UpdateRule::FedLin);
        config.rounds = 0;
        let theta0 = DMatrix::from_fn(3, 5, |i, j| (i + j) as f64);
        let (theta, trace) = run_fedsysid(&datasets, &config, &theta0, None).unwrap();
        assert_eq!(theta, theta0);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn trace_has_rounds_plus_one_entries() {
        let datasets = seeded_datasets(61, 3, 10);
        let config = base_config(3, UpdateRule::FedLin);
        let theta0 = DMatrix::zeros(3, 5);
        let (_, trace) = run_fedsysid(&datasets, &config, &theta0, None).unwrap();
        assert_eq!(trace.len(), config.rounds + 1);
        for (r, entry) in trace.iter().enumerate() {
            assert_eq!(entry.round, r);
            if r < config.rounds {
                assert_eq!(entry.participants.len(), 3);
            } else {
                assert!(entry.participants.is_empty());
            }
        }
    }

    #[test]
    fn corrected_residual_is_monotone_after_the_first_round() {
        let datasets = seeded_datasets(62, 5, 25);
        let mut config = base_config(5, UpdateRule::FedLin);
        config.rounds = 60;
        let theta0 = DMatrix::zeros(3, 5);
        let (_, trace) = run_fedsysid(&datasets, &config, &theta0, None).unwrap();
        for w in trace[1..].windows(2) {
            assert!(
                w[1].residual_to_pooled <= w[0].residual_to_pooled + 1e-12,
                "residual rose: {} -> {}",
                w[0].residual_to_pooled,
                w[1].residual_to_pooled
            );
        }
    }

    #[test]
    fn run_is_bit_reproducible() {
        let datasets = seeded_datasets(63, 4, 10);
        let mut config = base_config(4, UpdateRule::FedLin);
        config.participation = 0.5;
        let theta0 = DMatrix::zeros(3, 5);
        let (t1, tr1) = run_fedsysid(&datasets, &config, &theta0, None).unwrap();
        let (t2, tr2) = run_fedsysid(&datasets, &config, &theta0, None).unwrap();
        assert_eq!(t1, t2);
        for (a, b) in tr1.iter().zip(tr2.iter()) {
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.participants, b.participants);
        }
    }

    #[test]
    fn linearly_decreasing_schedule_is_floored() {
        let s = StepSchedule::LinearDecreasing(1e-2);
        assert!((s.step(0, 100) - 1e-2).abs() < 1e-18);
        assert!((s.step(50, 100) - 5e-3).abs() < 1e-18);
        // Last round hits the floor alpha0 / R.
        assert!((s.step(99, 100) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn config_validation_rejects_bad_knobs() {
        let good = base_config(3, UpdateRule::FedAvg);
        assert!(good.validate().is_ok());

        let mut c = good.clone();
        c.clients = 0;
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.local_steps = LocalSteps::Uniform(0);
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.local_steps = LocalSteps::PerClient(vec![1, 2]);
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.schedule = StepSchedule::Constant(0.0);
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.participation = 0.0;
        assert!(c.validate().is_err());

        let mut c = good;
        c.participation = 0.05; // rounds to zero participants out of 3
        assert!(c.validate().is_err());
    }
}
