//! Dense linear algebra helpers for small matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(0.0, f64::max)
}

/// (lambda_min, lambda_max) of a symmetric matrix. The input is symmetrized
/// first so accumulated round-off in products like Z Z^T cannot leak in.
pub fn sym_eigen_bounds(m: &DMatrix<f64>) -> (f64, f64) {
    let eigs = symmetrize(m).symmetric_eigen().eigenvalues;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &e in eigs.iter() {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (lo, hi)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Relative rank-deficiency guard used by the normal-equation solvers:
/// lambda_min below `GRAM_GUARD * lambda_max` is treated as singular.
pub const GRAM_GUARD: f64 = 1e-10;

/// Solves `gram * Y = rhs` for a symmetric positive definite `gram`,
/// rejecting numerically rank deficient systems.
pub fn solve_spd(gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (lambda_min, lambda_max) = sym_eigen_bounds(gram);
    let threshold = GRAM_GUARD * lambda_max.max(f64::MIN_POSITIVE);
    if lambda_min.is_nan() || lambda_min <= threshold {
        return Err(Error::SingularData {
            lambda_min,
            threshold,
        });
    }
    let chol = symmetrize(gram).cholesky().ok_or(Error::SingularData {
        lambda_min,
        threshold,
    })?;
    Ok(chol.solve(rhs))
}

/// Running mean m_k = m_{k-1} + (x_k - m_{k-1}) / k.
///
/// When every item is bitwise identical the correction term is exactly zero,
/// so the mean returns the common value bitwise.
pub fn running_mean<'a>(items: impl IntoIterator<Item = &'a DMatrix<f64>>) -> Option<DMatrix<f64>> {
    let mut iter = items.into_iter();
    let mut mean = iter.next()?.clone();
    let mut count = 1.0;
    for x in iter {
        count += 1.0;
        let delta = (x - &mean) / count;
        mean += delta;
    }
    Some(mean)
}

/// Block diagonal of two square blocks.
pub fn block_diag(upper: &DMatrix<f64>, lower: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b) = (upper.nrows(), lower.nrows());
    let mut out = DMatrix::zeros(a + b, a + b);
    out.view_mut((0, 0), (a, a)).copy_from(upper);
    out.view_mut((a, a), (b, b)).copy_from(lower);
    out
}

/// Horizontal concatenation of matrices with a common row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    assert!(!blocks.is_empty());
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows);
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -7.0]);
        assert!((spectral_norm(&m) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_gram_eigen_route() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.25, 3.0, 1.5]);
        let gram = m.transpose() * &m;
        let (_, lmax) = sym_eigen_bounds(&gram);
        assert!((spectral_norm(&m) - lmax.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn solve_spd_recovers_known_solution() {
        let gram = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let truth = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 3.0]);
        let rhs = &gram * &truth;
        let sol = solve_spd(&gram, &rhs).unwrap();
        assert!((sol - truth).norm() < 1e-12);
    }

    #[test]
    fn solve_spd_rejects_rank_deficient_gram() {
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DMatrix::identity(2, 2);
        match solve_spd(&gram, &rhs) {
            Err(Error::SingularData { lambda_min, .. }) => {
                assert!(lambda_min.abs() < 1e-12);
            }
            other => panic!("expected SingularData, got {other:?}"),
        }
    }

    #[test]
    fn running_mean_of_identical_items_is_bitwise_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.7]);
        let items = [m.clone(), m.clone(), m.clone(), m.clone(), m.clone()];
        let mean = running_mean(items.iter()).unwrap();
        assert_eq!(mean, m);
    }

    #[test]
    fn running_mean_matches_plain_average() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 10.0]);
        let b = DMatrix::from_row_slice(1, 2, &[2.0, 20.0]);
        let c = DMatrix::from_row_slice(1, 2, &[4.0, 30.0]);
        let mean = running_mean([&a, &b, &c]).unwrap();
        let plain = (&a + &b + &c) / 3.0;
        assert!((mean - plain).norm() < 1e-14);
    }

    #[test]
    fn block_diag_and_hstack_shapes() {
        let u = DMatrix::identity(2, 2);
        let l = DMatrix::from_element(3, 3, 2.0);
        let d = block_diag(&u, &l);
        assert_eq!(d.shape(), (5, 5));
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(2, 2)], 2.0);
        assert_eq!(d[(0, 2)], 0.0);

        let s = hstack(&[&u, &DMatrix::zeros(2, 3)]);
        assert_eq!(s.shape(), (2, 5));
    }
}
