//! Linear time-invariant dynamics: rollout simulation, batch data matrices,
//! and the closed-form state-input covariances.
//!
//! The model is `x_{t+1} = A x_t + B u_t + w_t` with `x_0 ~ N(0, sigma_x^2 I)`,
//! `u_t ~ N(0, sigma_u^2 I)` and `w_t ~ N(0, sigma_w^2 I)`, observed over
//! multiple independent rollouts of a common horizon.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{tags, RngStream};

/// Ground-truth system matrices `(A, B)` with `A` n-by-n and `B` n-by-p.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B must be {}xp with p >= 1, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "system matrices must be finite".into(),
            ));
        }
        Ok(LtiSystem { a, b })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The stacked parameter block `Theta = [A B]`, n-by-(n+p).
    pub fn theta(&self) -> DMatrix<f64> {
        linalg::hstack(&[&self.a, &self.b])
    }
}

/// Standard deviations of the initial state, input, and process noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_x: f64,
    pub sigma_u: f64,
    pub sigma_w: f64,
}

impl NoiseSpec {
    pub fn new(sigma_x: f64, sigma_u: f64, sigma_w: f64) -> Result<Self> {
        for (name, v) in [
            ("sigma_x", sigma_x),
            ("sigma_u", sigma_u),
            ("sigma_w", sigma_w),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(NoiseSpec {
            sigma_x,
            sigma_u,
            sigma_w,
        })
    }

    /// Unit noise on all three sources.
    pub fn unit() -> Self {
        NoiseSpec {
            sigma_x: 1.0,
            sigma_u: 1.0,
            sigma_w: 1.0,
        }
    }
}

/// One input-state trajectory, with the process noise retained so the
/// dynamics can be reassembled exactly.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub noises: Vec<DVector<f64>>,
}

impl Rollout {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

/// Batch matrices for one client: columns are forward in time, rollout-major.
///
/// `X` holds x_{l,1} .. x_{l,T}, `Z` holds z_{l,t} = [x_{l,t}; u_{l,t}] for
/// t = 0 .. T-1, and `W` the matching process noise, so `X = Theta Z + W`
/// column by column. `W` is `None` for externally supplied data where the
/// noise realization is unknown.
#[derive(Debug, Clone)]
pub struct ClientDataset {
    x: DMatrix<f64>,
    z: DMatrix<f64>,
    w: Option<DMatrix<f64>>,
    n_rollouts: usize,
    horizon: usize,
    system_id: usize,
    noise: NoiseSpec,
}

impl ClientDataset {
    /// Wraps pre-assembled batch matrices, validating shapes.
    pub fn from_parts(
        x: DMatrix<f64>,
        z: DMatrix<f64>,
        w: Option<DMatrix<f64>>,
        n_rollouts: usize,
        horizon: usize,
        system_id: usize,
        noise: NoiseSpec,
    ) -> Result<Self> {
        let cols = n_rollouts
            .checked_mul(horizon)
            .ok_or_else(|| Error::InvalidArgument("rollouts * horizon overflow".into()))?;
        if n_rollouts == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs n_rollouts >= 1 and horizon >= 1".into(),
            ));
        }
        if x.ncols() != cols || z.ncols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {cols} columns, got X: {}, Z: {}",
                x.ncols(),
                z.ncols()
            )));
        }
        if z.nrows() <= x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Z must have n+p > n rows, got Z: {}, X: {}",
                z.nrows(),
                x.nrows()
            )));
        }
        if let Some(w) = &w {
            if w.shape() != x.shape() {
                return Err(Error::DimensionMismatch(
                    "W must have the same shape as X".into(),
                ));
            }
        }
        Ok(ClientDataset {
            x,
            z,
            w,
            n_rollouts,
            horizon,
            system_id,
            noise,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn w(&self) -> Option<&DMatrix<f64>> {
        self.w.as_ref()
    }

    pub fn n_rollouts(&self) -> usize {
        self.n_rollouts
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn system_id(&self) -> usize {
        self.system_id
    }

    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.z.nrows() - self.x.nrows()
    }

    /// Number of data columns, `n_rollouts * horizon`.
    pub fn cols(&self) -> usize {
        self.x.ncols()
    }

    /// The Gram matrix Z Z^T, symmetrized.
    pub fn gram(&self) -> DMatrix<f64> {
        linalg::symmetrize(&(&self.z * self.z.transpose()))
    }

    /// The cross product X Z^T.
    pub fn cross(&self) -> DMatrix<f64> {
        &self.x * self.z.transpose()
    }

    /// Relative Frobenius residual of `X - Theta Z - W` for the generating
    /// system; requires the recorded noise.
    pub fn reconstruction_residual(&self, system: &LtiSystem) -> Result<f64> {
        let w = self.w.as_ref().ok_or(Error::MissingNoise(self.system_id))?;
        let residual = &self.x - system.theta() * &self.z - w;
        let scale = self.x.norm().max(1.0);
        Ok(residual.norm() / scale)
    }
}

/// Simulates one rollout of length `horizon` (states x_0 .. x_T).
///
/// Draw order per rollout: x_0 first, then (u_t, w_t) for each step, each
/// component-wise from the stream.
pub fn simulate_rollout(
    system: &LtiSystem,
    noise: &NoiseSpec,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<Rollout> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let n = system.state_dim();
    let p = system.input_dim();

    let mut states = Vec::with_capacity(horizon + 1);
    let mut inputs = Vec::with_capacity(horizon);
    let mut noises = Vec::with_capacity(horizon);

    states.push(DVector::from_fn(n, |_, _| rng.normal(noise.sigma_x)));
    for t in 0..horizon {
        let u = DVector::from_fn(p, |_, _| rng.normal(noise.sigma_u));
        let w = DVector::from_fn(n, |_, _| rng.normal(noise.sigma_w));
        let next = system.a() * &states[t] + system.b() * &u + &w;
        states.push(next);
        inputs.push(u);
        noises.push(w);
    }
    Ok(Rollout {
        states,
        inputs,
        noises,
    })
}

/// Simulates `n_rollouts` rollouts and assembles the batch matrices.
///
/// Rollout `l` draws from the child stream `rng.fork(ROLLOUT).fork(l)`, so
/// the dataset depends only on the stream key, not on call order.
pub fn simulate_client_dataset(
    system: &LtiSystem,
    noise: &NoiseSpec,
    n_rollouts: usize,
    horizon: usize,
    system_id: usize,
    rng: &RngStream,
) -> Result<ClientDataset> {
    if n_rollouts == 0 {
        return Err(Error::InvalidArgument("n_rollouts must be >= 1".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let n = system.state_dim();
    let p = system.input_dim();
    let cols = n_rollouts * horizon;

    let mut x = DMatrix::zeros(n, cols);
    let mut z = DMatrix::zeros(n + p, cols);
    let mut w = DMatrix::zeros(n, cols);

    let rollout_root = rng.fork(tags::ROLLOUT);
    for l in 0..n_rollouts {
        let mut stream = rollout_root.fork(l as u64);
        let rollout = simulate_rollout(system, noise, horizon, &mut stream)?;
        for t in 0..horizon {
            let c = l * horizon + t;
            x.column_mut(c).copy_from(&rollout.states[t + 1]);
            z.view_mut((0, c), (n, 1)).copy_from(&rollout.states[t]);
            z.view_mut((n, c), (p, 1)).copy_from(&rollout.inputs[t]);
            w.column_mut(c).copy_from(&rollout.noises[t]);
        }
    }
    ClientDataset::from_parts(x, z, Some(w), n_rollouts, horizon, system_id, *noise)
}

/// The Markov parameter blocks `G_t = [A^{t-1} B ... B]` (n-by-tp) and
/// `F_t = [A^{t-1} ... I]` (n-by-tn), for `t >= 1`.
pub fn markov_blocks(system: &LtiSystem, t: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "markov blocks are defined for t >= 1".into(),
        ));
    }
    let n = system.state_dim();
    let p = system.input_dim();
    let mut g = DMatrix::zeros(n, t * p);
    let mut f = DMatrix::zeros(n, t * n);

    // Fill right to left: block j from the right carries A^j.
    let mut a_pow = DMatrix::identity(n, n);
    for j in 0..t {
        let gb = &a_pow * system.b();
        g.view_mut((0, (t - 1 - j) * p), (n, p)).copy_from(&gb);
        f.view_mut((0, (t - 1 - j) * n), (n, n)).copy_from(&a_pow);
        a_pow = system.a() * a_pow;
    }
    Ok((g, f))
}

/// Covariances Sigma_0 .. Sigma_{T-1} of the stacked vector z_t = [x_t; u_t].
#[derive(Debug, Clone)]
pub struct CovarianceSequence {
    sigmas: Vec<DMatrix<f64>>,
    lambda_mins: Vec<f64>,
    lambda_maxs: Vec<f64>,
}

impl CovarianceSequence {
    fn new(sigmas: Vec<DMatrix<f64>>) -> Self {
        let (mut lambda_mins, mut lambda_maxs) = (Vec::new(), Vec::new());
        for s in &sigmas {
            let (lo, hi) = linalg::sym_eigen_bounds(s);
            lambda_mins.push(lo);
            lambda_maxs.push(hi);
        }
        CovarianceSequence {
            sigmas,
            lambda_mins,
            lambda_maxs,
        }
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn sigma(&self, t: usize) -> &DMatrix<f64> {
        &self.sigmas[t]
    }

    pub fn lambda_min(&self, t: usize) -> f64 {
        self.lambda_mins[t]
    }

    pub fn lambda_max(&self, t: usize) -> f64 {
        self.lambda_maxs[t]
    }

    /// Sum over t of Sigma_t.
    pub fn sum(&self) -> DMatrix<f64> {
        let mut acc = self.sigmas[0].clone();
        for s in &self.sigmas[1..] {
            acc += s;
        }
        acc
    }

    /// Every covariance scaled by `c` (diagnostic helper).
    pub fn scaled(&self, c: f64) -> CovarianceSequence {
        CovarianceSequence::new(self.sigmas.iter().map(|s| s * c).collect())
    }
}

/// Closed-form Sigma_t for t = 0 .. T-1.
///
/// Sigma_0 = blkdiag(sigma_x^2 I_n, sigma_u^2 I_p); for t >= 1 the upper
/// block is `sigma_u^2 G_t G_t^T + sigma_w^2 F_t F_t^T + sigma_x^2 A^t A^{tT}`
/// and the lower-right block is `sigma_u^2 I_p`.
///
/// Every Sigma_t with t >= 1 must be positive definite; Sigma_0 is allowed to
/// be singular when `horizon >= 2` (it degenerates when sigma_x = 0, which is
/// the zero-initial-state setting of the centralized bound).
pub fn sigma_t_closed_form(
    system: &LtiSystem,
    noise: &NoiseSpec,
    horizon: usize,
) -> Result<CovarianceSequence> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let n = system.state_dim();
    let p = system.input_dim();
    let var_x = noise.sigma_x * noise.sigma_x;
    let var_u = noise.sigma_u * noise.sigma_u;
    let var_w = noise.sigma_w * noise.sigma_w;

    let input_block = DMatrix::identity(p, p) * var_u;
    let mut sigmas = Vec::with_capacity(horizon);
    sigmas.push(linalg::block_diag(
        &(DMatrix::identity(n, n) * var_x),
        &input_block,
    ));

    let mut a_pow = DMatrix::identity(n, n);
    for t in 1..horizon {
        a_pow = system.a() * a_pow; // A^t
        let (g, f) = markov_blocks(system, t)?;
        let upper = linalg::symmetrize(
            &(&g * g.transpose() * var_u
                + &f * f.transpose() * var_w
                + &a_pow * a_pow.transpose() * var_x),
        );
        sigmas.push(linalg::block_diag(&upper, &input_block));
    }

    let seq = CovarianceSequence::new(sigmas);
    for t in 0..horizon {
        // Sigma_0 only needs to be definite when it is the whole sequence.
        if t == 0 && horizon > 1 {
            continue;
        }
        let guard = 1e-12 * seq.lambda_max(t).max(f64::MIN_POSITIVE);
        if seq.lambda_min(t).is_nan() || seq.lambda_min(t) <= guard {
            return Err(Error::NotIdentifiable(format!(
                "Sigma_{t} has lambda_min = {:.3e}; the noise specification \
                 does not excite the system",
                seq.lambda_min(t)
            )));
        }
    }
    Ok(seq)
}

/// Sample covariance of z_t over `sample_count` independent rollouts, using
/// the known zero mean. Sample `s` uses the child stream
/// `rng.fork(SAMPLE).fork(s)`.
pub fn sigma_t_monte_carlo(
    system: &LtiSystem,
    noise: &NoiseSpec,
    t: usize,
    sample_count: usize,
    rng: &RngStream,
) -> Result<DMatrix<f64>> {
    if sample_count < 1000 {
        return Err(Error::InvalidArgument(format!(
            "sample_count must be >= 1000 for a usable estimate, got {sample_count}"
        )));
    }
    let n = system.state_dim();
    let p = system.input_dim();
    let mut acc = DMatrix::zeros(n + p, n + p);
    let mut z = DVector::zeros(n + p);

    let sample_root = rng.fork(tags::SAMPLE);
    for s in 0..sample_count {
        let mut stream = sample_root.fork(s as u64);
        let rollout = simulate_rollout(system, noise, t + 1, &mut stream)?;
        z.rows_mut(0, n).copy_from(&rollout.states[t]);
        z.rows_mut(n, p).copy_from(&rollout.inputs[t]);
        acc.ger(1.0, &z, &z, 1.0);
    }
    Ok(linalg::symmetrize(&(acc / sample_count as f64)))
}

/// The benchmark 3-state / 2-input system used throughout the tests:
/// upper-triangular A with diagonal (0.6, 0.4, 0.3).
pub fn benchmark_system() -> LtiSystem {
    let a = DMatrix::from_row_slice(3, 3, &[0.6, 0.5, 0.4, 0.0, 0.4, 0.3, 0.0, 0.0, 0.3]);
    let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.5, 1.0, 0.5, 0.5]);
    LtiSystem::new(a, b).expect("benchmark system is valid")
}
