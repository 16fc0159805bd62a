//! Small dense helpers: a cyclic Jacobi symmetric eigensolver, inertia,
//! singular values and guarded inversion.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Reciprocal condition number below which a matrix is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-10;

/// Sweeps stop once the off-diagonal Frobenius norm drops below this fraction
/// of the input's Frobenius norm.
pub const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, unsorted, matching the columns of `vectors`.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

fn off_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Only the lower triangle is trusted; the input is symmetrised first.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> SymmetricEigen {
    assert!(m.is_square(), "jacobi_eigen needs a square matrix");
    let n = m.nrows();
    let mut a = DMatrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });
    let mut v = DMatrix::identity(n, n);
    let target = JACOBI_REL_TOL * a.norm();
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_norm(&a) > target {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the rotation in the (p, q) plane
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen {
        values: (0..n).map(|i| a[(i, i)]).collect(),
        vectors: v,
        sweeps,
    }
}

/// Counts of positive and negative eigenvalues. Fails when some eigenvalue
/// has magnitude below `rel_threshold * max |λ|`.
pub fn inertia(values: &[f64], rel_threshold: f64) -> Result<(usize, usize)> {
    let max = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if let Some(bad) = values.iter().find(|v| v.abs() <= rel_threshold * max) {
        return Err(Error::Degenerate { value: *bad });
    }
    let p = values.iter().filter(|v| **v > 0.0).count();
    Ok((p, values.len() - p))
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rel * max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|s| **s > rel * max).count()
}

pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Inverse of `m`, refusing matrices whose reciprocal condition number is
/// below [`SINGULAR_RCOND`].
pub fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rc = rcond(m);
    if !(rc >= SINGULAR_RCOND) {
        return Err(Error::Singular { rcond: rc });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::Singular { rcond: rc })
}
