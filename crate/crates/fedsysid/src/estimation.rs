//! Least-squares estimators over batch data and the spectral error metrics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::{ClientDataset, LtiSystem};

/// An estimated parameter block `Theta = [A B]`, n-by-(n+p).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEstimate {
    theta: DMatrix<f64>,
    state_dim: usize,
    input_dim: usize,
}

impl ThetaEstimate {
    pub fn new(theta: DMatrix<f64>, state_dim: usize, input_dim: usize) -> Result<Self> {
        if theta.nrows() != state_dim || theta.ncols() != state_dim + input_dim {
            return Err(Error::DimensionMismatch(format!(
                "theta must be {}x{}, got {}x{}",
                state_dim,
                state_dim + input_dim,
                theta.nrows(),
                theta.ncols()
            )));
        }
        Ok(ThetaEstimate {
            theta,
            state_dim,
            input_dim,
        })
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    /// Left n-by-n block.
    pub fn a_hat(&self) -> DMatrix<f64> {
        self.theta
            .view((0, 0), (self.state_dim, self.state_dim))
            .into_owned()
    }

    /// Right n-by-p block.
    pub fn b_hat(&self) -> DMatrix<f64> {
        self.theta
            .view((0, self.state_dim), (self.state_dim, self.input_dim))
            .into_owned()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
}

/// Spectral norms of the per-block estimation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub err_a: f64,
    pub err_b: f64,
    pub err_max: f64,
}

fn solve_ls(
    gram: &DMatrix<f64>,
    cross: &DMatrix<f64>,
    n: usize,
    p: usize,
) -> Result<ThetaEstimate> {
    // Theta = cross * gram^{-1}, solved as gram * Theta^T = cross^T.
    let theta_t = linalg::solve_spd(gram, &cross.transpose())?;
    ThetaEstimate::new(theta_t.transpose(), n, p)
}

/// Least-squares estimate `Theta = X Z^T (Z Z^T)^{-1}`, the minimizer of
/// `||X - Theta Z||_F^2`.
pub fn ls_estimate(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<ThetaEstimate> {
    let n = x.nrows();
    if z.nrows() <= n {
        return Err(Error::DimensionMismatch(format!(
            "Z must have n+p > n rows, got Z: {}, X: {}",
            z.nrows(),
            n
        )));
    }
    if x.ncols() != z.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "X and Z must share columns, got {} and {}",
            x.ncols(),
            z.ncols()
        )));
    }
    let p = z.nrows() - n;
    if x.ncols() < n + p {
        return Err(Error::InvalidArgument(format!(
            "need at least n+p = {} columns, got {}",
            n + p,
            x.ncols()
        )));
    }
    let gram = linalg::symmetrize(&(z * z.transpose()));
    let cross = x * z.transpose();
    solve_ls(&gram, &cross, n, p)
}

fn check_consistent(datasets: &[ClientDataset]) -> Result<(usize, usize)> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one dataset".into()))?;
    let (n, p) = (first.state_dim(), first.input_dim());
    for (i, ds) in datasets.iter().enumerate() {
        if ds.state_dim() != n || ds.input_dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "dataset {i} has dims ({}, {}), expected ({n}, {p})",
                ds.state_dim(),
                ds.input_dim()
            )));
        }
    }
    Ok((n, p))
}

/// The pooled estimator over all clients' stacked data: the minimizer of
/// `sum_i ||X_i - Theta Z_i||_F^2`, computed from the summed Gram and cross
/// products. Equals `ls_estimate` on horizontally concatenated matrices.
pub fn pooled_ls(datasets: &[ClientDataset]) -> Result<ThetaEstimate> {
    let (n, p) = check_consistent(datasets)?;
    let total_cols: usize = datasets.iter().map(|d| d.cols()).sum();
    if total_cols < n + p {
        return Err(Error::InvalidArgument(format!(
            "need at least n+p = {} combined columns, got {total_cols}",
            n + p
        )));
    }
    let mut gram = DMatrix::zeros(n + p, n + p);
    let mut cross = DMatrix::zeros(n, n + p);
    for ds in datasets {
        gram += ds.gram();
        cross += ds.cross();
    }
    solve_ls(&gram, &cross, n, p)
}

/// The literal average-of-argmins reading: `(1/M) sum_i ls_estimate(X_i, Z_i)`.
/// Kept alongside `pooled_ls` for comparison; the two coincide when all
/// clients share the same Gram matrix.
pub fn avg_of_local_ls(datasets: &[ClientDataset]) -> Result<ThetaEstimate> {
    let (n, p) = check_consistent(datasets)?;
    let mut locals = Vec::with_capacity(datasets.len());
    for (i, ds) in datasets.iter().enumerate() {
        let est = ls_estimate(ds.x(), ds.z()).map_err(|e| e.for_client(i))?;
        locals.push(est.theta().clone());
    }
    let mean = linalg::running_mean(locals.iter()).expect("at least one dataset");
    ThetaEstimate::new(mean, n, p)
}

/// Spectral norms of `A_hat - A`, `B_hat - B`, and their maximum.
pub fn estimation_error(estimate: &ThetaEstimate, truth: &LtiSystem) -> Result<ErrorNorms> {
    if estimate.state_dim() != truth.state_dim() || estimate.input_dim() != truth.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is ({}, {}), truth is ({}, {})",
            estimate.state_dim(),
            estimate.input_dim(),
            truth.state_dim(),
            truth.input_dim()
        )));
    }
    let err_a = linalg::spectral_norm(&(estimate.a_hat() - truth.a()));
    let err_b = linalg::spectral_norm(&(estimate.b_hat() - truth.b()));
    Ok(ErrorNorms {
        err_a,
        err_b,
        err_max: err_a.max(err_b),
    })
}

/// Spectral distance between a raw parameter block and a system's `[A B]`.
pub fn theta_distance(theta: &DMatrix<f64>, truth: &LtiSystem) -> f64 {
    linalg::spectral_norm(&(theta - truth.theta()))
}
