//! Finite-sample error bounds and the matching empirical diagnostics:
//! the centralized single-system bound, the federated two-term bound with
//! its error and heterogeneity constants, and the concentration inequalities
//! on the data Gram and noise-cross products that drive them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::{sigma_t_closed_form, ClientDataset, CovarianceSequence, LtiSystem, NoiseSpec};

/// Evaluation of the federated two-term error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// 16 sqrt((2n+p) log(9MT/delta)).
    pub c0: f64,
    /// Error (noise) constant multiplying (sum_i N_i)^{-1/2}.
    pub c1: f64,
    /// Heterogeneity constant multiplying epsilon.
    pub c2: f64,
    pub term_noise: f64,
    pub term_hetero: f64,
    pub total: f64,
    pub delta: f64,
    /// Whether every N_i meets the sample-size hypothesis.
    pub sample_ok: bool,
}

/// Per-client check of the Gram lower bound `Z Z^T >= (N/4) sum_t Sigma_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramCheck {
    pub lambda_min_gram: f64,
    /// (N_i/4) lambda_min(sum_t Sigma_t).
    pub lambda_min_threshold: f64,
    /// lambda_min(Z Z^T - (N_i/4) sum_t Sigma_t); nonnegative iff the
    /// semidefinite ordering holds.
    pub psd_margin: f64,
}

/// Measured concentration quantities paired with their predicted bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    /// Measured ||W Z^T|| over the pooled data.
    pub wz_norm: f64,
    pub wz_bound: f64,
    /// Per-client measured ||Delta^(i) Z^T||, the cross-system mismatch term.
    pub dz_norms: Vec<f64>,
    pub dz_bounds: Vec<f64>,
    pub gram_checks: Vec<GramCheck>,
    /// Condition number of the pooled Gram (1/M) sum_i Z_i Z_i^T.
    pub beta: f64,
    /// Sample-size thresholds (gram bound, wz bound) at the given delta.
    pub n_threshold_gram: f64,
    pub n_threshold_wz: f64,
}

/// Centralized single-system bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralizedBound {
    pub value: f64,
    pub n_threshold: f64,
    /// Whether N meets the hypothesis; the value is reported either way.
    pub sample_ok: bool,
}

/// Largest pairwise spectral gap `max(||A_i - A_j||, ||B_i - B_j||)` over the
/// ensemble; zero for fewer than two systems.
pub fn measure_heterogeneity(systems: &[LtiSystem]) -> Result<f64> {
    if systems.len() < 2 {
        return Ok(0.0);
    }
    let (n, p) = (systems[0].state_dim(), systems[0].input_dim());
    for (i, s) in systems.iter().enumerate() {
        if s.state_dim() != n || s.input_dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "system {i} has dims ({}, {}), expected ({n}, {p})",
                s.state_dim(),
                s.input_dim()
            )));
        }
    }
    let mut eps = 0.0f64;
    for i in 0..systems.len() {
        for j in (i + 1)..systems.len() {
            let da = linalg::spectral_norm(&(systems[i].a() - systems[j].a()));
            let db = linalg::spectral_norm(&(systems[i].b() - systems[j].b()));
            eps = eps.max(da).max(db);
        }
    }
    Ok(eps)
}

fn check_delta(delta: f64, hi: f64) -> Result<()> {
    if !(delta > 0.0 && delta < hi) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, {hi}), got {delta}"
        )));
    }
    Ok(())
}

/// Single-system bound
/// `16 sigma_w / sqrt(lambda_min(Sigma_{T-1})) * sqrt((n + 2p) log(36/delta) / N)`,
/// with the covariance evaluated at zero initial state.
pub fn centralized_bound(
    system: &LtiSystem,
    noise: &NoiseSpec,
    rollouts: usize,
    horizon: usize,
    delta: f64,
) -> Result<CentralizedBound> {
    check_delta(delta, 1.0)?;
    if rollouts == 0 || horizon == 0 {
        return Err(Error::InvalidArgument(
            "rollouts and horizon must be >= 1".into(),
        ));
    }
    let n = system.state_dim() as f64;
    let p = system.input_dim() as f64;
    // The hypothesis fixes x_0 = 0 regardless of the simulation noise.
    let zero_start = NoiseSpec::new(0.0, noise.sigma_u, noise.sigma_w)?;
    let seq = sigma_t_closed_form(system, &zero_start, horizon)?;
    let lambda_min = seq.lambda_min(horizon - 1);
    if lambda_min.is_nan() || lambda_min <= 0.0 {
        return Err(Error::NotIdentifiable(format!(
            "Sigma_(T-1) is singular at zero initial state (lambda_min = {lambda_min:.3e})"
        )));
    }
    let n_threshold = 8.0 * (n + p) + 16.0 * (4.0 / delta).ln();
    let value = 16.0 * noise.sigma_w / lambda_min.sqrt()
        * ((n + 2.0 * p) * (36.0 / delta).ln() / rollouts as f64).sqrt();
    Ok(CentralizedBound {
        value,
        n_threshold,
        sample_ok: rollouts as f64 >= n_threshold,
    })
}

/// Federated bound from explicit covariance sequences. `sigma_ws[i]` is the
/// process-noise std of client i; `counts[i]` its rollout count.
pub fn federated_bound_from_covariances(
    seqs: &[CovarianceSequence],
    sigma_ws: &[f64],
    counts: &[usize],
    state_dim: usize,
    input_dim: usize,
    epsilon: f64,
    delta: f64,
) -> Result<BoundReport> {
    check_delta(delta, 1.0 / 3.0)?;
    let clients = seqs.len();
    if clients == 0 || sigma_ws.len() != clients || counts.len() != clients {
        return Err(Error::DimensionMismatch(format!(
            "got {clients} covariance sequences, {} noise stds, {} counts",
            sigma_ws.len(),
            counts.len()
        )));
    }
    if epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let horizon = seqs[0].len();
    if seqs.iter().any(|s| s.len() != horizon) || horizon == 0 {
        return Err(Error::DimensionMismatch(
            "all covariance sequences must share a horizon >= 1".into(),
        ));
    }
    let (n, p, m, t) = (
        state_dim as f64,
        input_dim as f64,
        clients as f64,
        horizon as f64,
    );

    // Per-client ingredients: sum_t ||Sigma_t^{1/2}||, sum_t ||Sigma_t||, and
    // lambda_min(sum_t Sigma_t). For symmetric PSD Sigma the two norms are
    // sqrt(lambda_max) and lambda_max.
    let mut sum_sqrt_norms = Vec::with_capacity(clients);
    let mut sum_norms = Vec::with_capacity(clients);
    let mut lmin_of_sum = Vec::with_capacity(clients);
    for seq in seqs {
        let mut half = 0.0;
        let mut full = 0.0;
        for tt in 0..horizon {
            let lmax = seq.lambda_max(tt).max(0.0);
            half += lmax.sqrt();
            full += lmax;
        }
        sum_sqrt_norms.push(half);
        sum_norms.push(full);
        let (lo, _) = linalg::sym_eigen_bounds(&seq.sum());
        lmin_of_sum.push(lo);
    }
    let denom = lmin_of_sum.iter().cloned().fold(f64::INFINITY, f64::min);
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::NotIdentifiable(format!(
            "min_i lambda_min(sum_t Sigma_t) = {denom:.3e} is not positive"
        )));
    }

    let c0 = 16.0 * ((2.0 * n + p) * (9.0 * m * t / delta).ln()).sqrt();
    let noise_mass: f64 = (0..clients)
        .map(|i| sigma_ws[i] * sigma_ws[i] * sum_sqrt_norms[i] * sum_sqrt_norms[i])
        .sum();
    let c1 = c0 * noise_mass.sqrt() / denom;
    // Worst case over the bounded client i; the inner sum over j != i has
    // M - 1 identical terms as displayed.
    let c2 = (0..clients)
        .map(|i| 9.0 * (m - 1.0) * sum_norms[i] / denom)
        .fold(0.0, f64::max);

    let total_rollouts: usize = counts.iter().sum();
    let term_noise = c1 / (total_rollouts as f64).sqrt();
    let term_hetero = epsilon * c2;

    let n_threshold = (8.0 * (n + p) + 16.0 * (2.0 * m * t / delta).ln())
        .max((4.0 * n + 2.0 * p) * (m * t / delta).ln());
    let sample_ok = counts.iter().all(|&c| c as f64 >= n_threshold);

    Ok(BoundReport {
        c0,
        c1,
        c2,
        term_noise,
        term_hetero,
        total: term_noise + term_hetero,
        delta,
        sample_ok,
    })
}

/// Federated bound from the ensemble description: covariances are computed
/// in closed form per client (including each client's initial-state noise).
pub fn federated_bound(
    systems: &[LtiSystem],
    noises: &[NoiseSpec],
    counts: &[usize],
    horizon: usize,
    epsilon: f64,
    delta: f64,
) -> Result<BoundReport> {
    if systems.is_empty() || systems.len() != noises.len() || systems.len() != counts.len() {
        return Err(Error::DimensionMismatch(format!(
            "got {} systems, {} noise specs, {} counts",
            systems.len(),
            noises.len(),
            counts.len()
        )));
    }
    let seqs: Vec<CovarianceSequence> = systems
        .iter()
        .zip(noises.iter())
        .map(|(sys, noise)| sigma_t_closed_form(sys, noise, horizon))
        .collect::<Result<_>>()?;
    let sigma_ws: Vec<f64> = noises.iter().map(|n| n.sigma_w).collect();
    federated_bound_from_covariances(
        &seqs,
        &sigma_ws,
        counts,
        systems[0].state_dim(),
        systems[0].input_dim(),
        epsilon,
        delta,
    )
}

/// Measures the concentration quantities on simulated data and pairs each
/// with its predicted bound. Requires the recorded noise matrices.
pub fn empirical_diagnostics(
    systems: &[LtiSystem],
    datasets: &[ClientDataset],
    delta: f64,
) -> Result<DiagnosticsReport> {
    check_delta(delta, 1.0)?;
    if systems.is_empty() || systems.len() != datasets.len() {
        return Err(Error::DimensionMismatch(format!(
            "got {} systems for {} datasets",
            systems.len(),
            datasets.len()
        )));
    }
    let clients = datasets.len();
    let horizon = datasets[0].horizon();
    let (n, p) = (systems[0].state_dim(), systems[0].input_dim());
    for (i, ds) in datasets.iter().enumerate() {
        if ds.w().is_none() {
            return Err(Error::MissingNoise(i));
        }
        if ds.horizon() != horizon {
            return Err(Error::DimensionMismatch(
                "diagnostics assume a common horizon".into(),
            ));
        }
        if ds.state_dim() != n || ds.input_dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "dataset {i} dims do not match the systems"
            )));
        }
    }

    let thetas: Vec<DMatrix<f64>> = systems.iter().map(|s| s.theta()).collect();
    let grams: Vec<DMatrix<f64>> = datasets.iter().map(|d| d.gram()).collect();
    let seqs: Vec<CovarianceSequence> = systems
        .iter()
        .zip(datasets.iter())
        .map(|(sys, ds)| sigma_t_closed_form(sys, &ds.noise(), horizon))
        .collect::<Result<_>>()?;
    let sum_norms: Vec<f64> = seqs
        .iter()
        .map(|seq| (0..horizon).map(|t| seq.lambda_max(t).max(0.0)).sum())
        .collect();
    let sum_sqrt_norms: Vec<f64> = seqs
        .iter()
        .map(|seq| {
            (0..horizon)
                .map(|t| seq.lambda_max(t).max(0.0).sqrt())
                .sum()
        })
        .collect();

    let (m, t) = (clients as f64, horizon as f64);

    // ||W Z^T|| over the pooled data equals || sum_i W_i Z_i^T ||.
    let mut wz = DMatrix::zeros(n, n + p);
    for ds in datasets {
        wz += ds.w().expect("checked above") * ds.z().transpose();
    }
    let wz_norm = linalg::spectral_norm(&wz);
    let wz_bound: f64 = (0..clients)
        .map(|i| {
            4.0 * datasets[i].noise().sigma_w
                * (datasets[i].n_rollouts() as f64
                    * (2.0 * n as f64 + p as f64)
                    * (9.0 * m * t / delta).ln())
                .sqrt()
                * sum_sqrt_norms[i]
        })
        .sum();

    // Cross-system mismatch: Delta^(i) Z^T = sum_{j != i} (Theta_j - Theta_i) Z_j Z_j^T.
    let mut dz_norms = Vec::with_capacity(clients);
    let mut dz_bounds = Vec::with_capacity(clients);
    for i in 0..clients {
        let mut acc = DMatrix::zeros(n, n + p);
        let mut bound = 0.0;
        for j in 0..clients {
            if j == i {
                continue;
            }
            let eps_theta = &thetas[j] - &thetas[i];
            acc += &eps_theta * &grams[j];
            bound += 9.0 * datasets[j].n_rollouts() as f64 / 4.0
                * linalg::spectral_norm(&eps_theta)
                * sum_norms[j];
        }
        dz_norms.push(linalg::spectral_norm(&acc));
        dz_bounds.push(bound);
    }

    let gram_checks: Vec<GramCheck> = (0..clients)
        .map(|i| {
            let quarter = datasets[i].n_rollouts() as f64 / 4.0;
            let (lambda_min_gram, _) = linalg::sym_eigen_bounds(&grams[i]);
            let sum_sigma = seqs[i].sum();
            let (lmin_sum, _) = linalg::sym_eigen_bounds(&sum_sigma);
            let (psd_margin, _) = linalg::sym_eigen_bounds(&(&grams[i] - sum_sigma * quarter));
            GramCheck {
                lambda_min_gram,
                lambda_min_threshold: quarter * lmin_sum,
                psd_margin,
            }
        })
        .collect();

    let pooled_gram = linalg::running_mean(grams.iter()).expect("non-empty");
    let (lo, hi) = linalg::sym_eigen_bounds(&pooled_gram);
    if lo.is_nan() || lo <= 0.0 {
        return Err(Error::SingularData {
            lambda_min: lo,
            threshold: 0.0,
        });
    }

    Ok(DiagnosticsReport {
        wz_norm,
        wz_bound,
        dz_norms,
        dz_bounds,
        gram_checks,
        beta: hi / lo,
        n_threshold_gram: 8.0 * (n + p) as f64 + 16.0 * (2.0 * m * t / delta).ln(),
        n_threshold_wz: (4.0 * n as f64 + 2.0 * p as f64) * (m * t / delta).ln(),
    })
}
