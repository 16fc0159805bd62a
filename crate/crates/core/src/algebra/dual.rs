use nalgebra::DMatrix;

use super::params::{lower_pairs, DeformationParams};
use crate::error::{Error, Result};

/// A point of the dual space, realised as a strictly upper-triangular matrix.
///
/// Coordinates are ordered like the skew coordinates they pair with: the
/// entry `ρ_{ji}` (with `j < i`) sits at the position of the lower pair
/// `(i, j)` in row-major order, i.e. `ρ12, ρ13, ρ23, ρ14, ρ24, ρ34, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    params: DeformationParams,
    rho: DMatrix<f64>,
}

impl DualPoint {
    pub fn zero(params: &DeformationParams) -> Self {
        let n = params.n();
        Self {
            params: params.clone(),
            rho: DMatrix::zeros(n, n),
        }
    }

    pub fn from_coords(params: &DeformationParams, coords: &[f64]) -> Result<Self> {
        let dim = params.skew_dim();
        if coords.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len(),
            });
        }
        let n = params.n();
        let mut rho = DMatrix::zeros(n, n);
        for ((i, j), v) in lower_pairs(n).zip(coords) {
            rho[(j, i)] = *v;
        }
        Ok(Self {
            params: params.clone(),
            rho,
        })
    }

    /// Accepts `m` only if it is strictly upper-triangular.
    pub fn from_matrix(params: &DeformationParams, m: DMatrix<f64>) -> Result<Self> {
        let n = params.n();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.nrows().max(m.ncols()),
            });
        }
        for i in 0..n {
            for j in 0..=i {
                if m[(i, j)] != 0.0 {
                    return Err(Error::Precondition(format!(
                        "dual point entry ({i}, {j}) on or below the diagonal is nonzero"
                    )));
                }
            }
        }
        Ok(Self {
            params: params.clone(),
            rho: m,
        })
    }

    /// Strictly-upper truncation `π⁺` of an arbitrary square matrix.
    pub fn truncate(params: &DeformationParams, m: &DMatrix<f64>) -> Self {
        let n = params.n();
        let rho = DMatrix::from_fn(n, n, |i, j| if i < j { m[(i, j)] } else { 0.0 });
        Self {
            params: params.clone(),
            rho,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        lower_pairs(self.params.n())
            .map(|(i, j)| self.rho[(j, i)])
            .collect()
    }

    pub fn params(&self) -> &DeformationParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rho
    }

    pub fn max_abs(&self) -> f64 {
        super::elements::max_abs(&self.rho)
    }

    pub fn is_finite(&self) -> bool {
        self.rho.iter().all(|v| v.is_finite())
    }
}
