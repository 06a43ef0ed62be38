//! Small dense solvers used by the forecasting baselines.

use crate::error::{Error, Result};
use crate::num::Real;

/// Solves `A x = b` for a small dense row-major `A` by Gaussian elimination
/// with partial pivoting.
pub fn solve_dense<T: Real>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale = m
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() {
        return Err(Error::SingularSystem);
    }
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n) * T::lit(16.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() <= tiny {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] = m[row][k] - factor * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for k in i + 1..n {
            s = s - m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Ok(x)
}

/// Inverse of a small dense matrix (columns solved one at a time).
pub fn invert_dense<T: Real>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve_dense(a, &e)?);
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Levinson–Durbin recursion for the Yule–Walker equations.
///
/// `acov[k]` is the autocovariance at lag `k` (`k = 0..=order`). Returns the
/// AR coefficients `φ_1..φ_p` and the innovation variance.
pub fn levinson_durbin<T: Real>(acov: &[T], order: usize) -> Result<(Vec<T>, T)> {
    if acov.len() <= order {
        return Err(Error::InvalidParameter(format!(
            "need {} autocovariances for order {order}",
            order + 1
        )));
    }
    if acov[0] <= T::zero() {
        return Err(Error::SingularSystem);
    }
    let mut phi = vec![T::zero(); order];
    let mut err = acov[0];
    for k in 0..order {
        let mut acc = acov[k + 1];
        for j in 0..k {
            acc = acc - phi[j] * acov[k - j];
        }
        let reflection = acc / err;
        let prev = phi.clone();
        phi[k] = reflection;
        for j in 0..k {
            phi[j] = prev[j] - reflection * prev[k - 1 - j];
        }
        err = err * (T::one() - reflection * reflection);
        if err <= T::zero() {
            return Err(Error::SingularSystem);
        }
    }
    Ok((phi, err))
}
