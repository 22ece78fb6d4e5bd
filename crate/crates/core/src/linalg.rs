//! Dense factorizations on [`SpectralOperator`] via faer.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;

use crate::tensor::{SpectralOperator, TensorError, C64};

fn to_mat(a: &SpectralOperator) -> Mat<C64> {
    Mat::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
}

fn from_mat(m: &Mat<C64>, like: &SpectralOperator) -> SpectralOperator {
    SpectralOperator::from_fn(like.factors(), like.roles(), |i, j| m[(i, j)])
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &SpectralOperator) -> Vec<f64> {
    let mut s = to_mat(a)
        .singular_values()
        .expect("singular value decomposition converges for finite input");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank(a: &SpectralOperator, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Ratio of extreme singular values.
pub fn condition_number(a: &SpectralOperator) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn inverse(a: &SpectralOperator) -> Result<SpectralOperator, TensorError> {
    let cond = condition_number(a);
    if cond.is_nan() || cond >= 1e14 {
        return Err(TensorError::Singular);
    }
    Ok(from_mat(&to_mat(a).partial_piv_lu().inverse(), a))
}

/// Solves `a x = b` for a small dense system given row by row.
pub fn solve(a: &[Vec<C64>], b: &[C64]) -> Result<Vec<C64>, TensorError> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(TensorError::DimensionMismatch(format!("{}-row system with {n} unknowns", a.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::from_fn(n, n, |i, j| a[i][j]);
    let s = m.singular_values().map_err(|_| TensorError::Singular)?;
    let hi = s.iter().copied().fold(0.0, f64::max);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 || lo <= 1e-15 * hi {
        return Err(TensorError::Singular);
    }
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Right eigen-decomposition: eigenvalues and the matrix whose columns are
/// the eigenvectors, stored row-major as an operator with `a`'s layout.
pub fn eigen(a: &SpectralOperator) -> Result<(Vec<C64>, SpectralOperator), TensorError> {
    let evd = to_mat(a).eigen().map_err(|_| TensorError::Singular)?;
    let values = evd.S().column_vector();
    let n = a.dim();
    let vals = (0..n).map(|i| values[i]).collect();
    let u = evd.U();
    let vecs = SpectralOperator::from_fn(a.factors(), a.roles(), |i, j| u[(i, j)]);
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{re, rel_residual};

    fn diag(v: &[f64]) -> SpectralOperator {
        SpectralOperator::from_fn(&[v.len()], &[crate::tensor::Role::Quantum], |i, j| {
            if i == j {
                re(v[i])
            } else {
                C64::default()
            }
        })
    }

    #[test]
    fn rank_of_diagonal() {
        assert_eq!(rank(&diag(&[1.0, 0.0, 2.0, 1e-12]), 1e-8), 2);
        assert_eq!(rank(&diag(&[0.0, 0.0]), 1e-8), 0);
    }

    #[test]
    fn inverse_round_trip() {
        let a = SpectralOperator::from_fn(&[3], &[crate::tensor::Role::Quantum], |i, j| {
            C64::new((i * 3 + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let prod = a.matmul(&inverse(&a).unwrap());
        assert!(rel_residual(&prod, &SpectralOperator::quantum_identity(&[3])).unwrap() < 1e-12);
        assert_eq!(inverse(&diag(&[1.0, 0.0])), Err(TensorError::Singular));
    }

    #[test]
    fn eigen_reconstructs() {
        let a = SpectralOperator::from_fn(&[4], &[crate::tensor::Role::Quantum], |i, j| {
            C64::new(((i + 2 * j) % 5) as f64, 0.3 * (i as f64 - j as f64))
        });
        let (vals, v) = eigen(&a).unwrap();
        let av = a.matmul(&v);
        for (k, &val) in vals.iter().enumerate() {
            for i in 0..4 {
                assert!((av.get(i, k) - val * v.get(i, k)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![re(2.0), re(1.0)], vec![re(1.0), re(3.0)]];
        let x = solve(&a, &[re(3.0), re(5.0)]).unwrap();
        assert!((x[0] - re(0.8)).norm() < 1e-14 && (x[1] - re(1.4)).norm() < 1e-14);
        assert!(solve(&[vec![re(0.0)]], &[re(1.0)]).is_err());
    }
}
