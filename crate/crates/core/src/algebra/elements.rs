use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::params::{lower_diag_pairs, lower_pairs, DeformationParams};
use super::structure::{build_structure, StructureMatrices};
use crate::error::{Error, Result};

/// Default membership tolerance, relative to the matrix max-abs entry.
pub const DEFAULT_TOL: f64 = 1e-12;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// An element of the deformed skew-symmetric space: `x_ii = 0` and
/// `x_ij = -(a_i ... a_{j-1}) x_ji` above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewElement {
    params: DeformationParams,
    m: DMatrix<f64>,
}

/// An element of the deformed symmetric space: `s_ij = (a_i ... a_{j-1}) s_ji`
/// above the diagonal, diagonal free.
#[derive(Debug, Clone, PartialEq)]
pub struct SymElement {
    params: DeformationParams,
    m: DMatrix<f64>,
}

impl SkewElement {
    pub fn zero(params: &DeformationParams) -> Self {
        let n = params.n();
        Self {
            params: params.clone(),
            m: DMatrix::zeros(n, n),
        }
    }

    /// Builds the element whose strictly-lower triangle is `lower` (row-major
    /// over pairs `i > j`); the upper triangle is forced.
    pub fn from_coords(params: &DeformationParams, lower: &[f64]) -> Result<Self> {
        let dim = params.skew_dim();
        if lower.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lower.len(),
            });
        }
        let n = params.n();
        let mut m = DMatrix::zeros(n, n);
        for ((i, j), v) in lower_pairs(n).zip(lower) {
            m[(i, j)] = *v;
            m[(j, i)] = -params.prod(j, i) * v;
        }
        Ok(Self {
            params: params.clone(),
            m,
        })
    }

    /// Completes the strictly-lower triangle of an arbitrary square matrix to
    /// a member; everything on or above the diagonal is ignored.
    pub fn from_lower_part(params: &DeformationParams, m: &DMatrix<f64>) -> Result<Self> {
        check_square(params, m)?;
        let coords: Vec<f64> = lower_pairs(params.n()).map(|(i, j)| m[(i, j)]).collect();
        Self::from_coords(params, &coords)
    }

    /// Wraps `m` after checking membership at relative tolerance `tol`.
    pub fn from_matrix(params: &DeformationParams, m: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_square(params, &m)?;
        let residual = skew_residual(params, &m);
        if residual > tol * max_abs(&m) {
            return Err(Error::NotMember {
                space: "deformed skew-symmetric",
                residual,
            });
        }
        Ok(Self {
            params: params.clone(),
            m,
        })
    }

    pub(crate) fn from_matrix_unchecked(params: &DeformationParams, m: DMatrix<f64>) -> Self {
        Self {
            params: params.clone(),
            m,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        lower_pairs(self.params.n()).map(|(i, j)| self.m[(i, j)]).collect()
    }

    /// The standard basis: one element per strictly-lower position.
    pub fn basis(params: &DeformationParams) -> Vec<Self> {
        let dim = params.skew_dim();
        (0..dim)
            .map(|k| {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                Self::from_coords(params, &e).expect("basis coordinates have the right length")
            })
            .collect()
    }

    pub fn params(&self) -> &DeformationParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }
}

impl SymElement {
    pub fn zero(params: &DeformationParams) -> Self {
        let n = params.n();
        Self {
            params: params.clone(),
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(params: &DeformationParams) -> Self {
        let n = params.n();
        Self {
            params: params.clone(),
            m: DMatrix::identity(n, n),
        }
    }

    /// Diagonal matrices belong to the space for every parameter choice.
    pub fn diagonal(params: &DeformationParams, diag: &[f64]) -> Result<Self> {
        if diag.len() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                got: diag.len(),
            });
        }
        Ok(Self {
            params: params.clone(),
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
        })
    }

    /// Lower-plus-diagonal coordinates in row-major order over `i >= j`.
    pub fn from_coords(params: &DeformationParams, lower_diag: &[f64]) -> Result<Self> {
        let dim = params.sym_dim();
        if lower_diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lower_diag.len(),
            });
        }
        let n = params.n();
        let mut m = DMatrix::zeros(n, n);
        for ((i, j), v) in lower_diag_pairs(n).zip(lower_diag) {
            m[(i, j)] = *v;
            if i != j {
                m[(j, i)] = params.prod(j, i) * v;
            }
        }
        Ok(Self {
            params: params.clone(),
            m,
        })
    }

    pub fn from_matrix(params: &DeformationParams, m: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_square(params, &m)?;
        let residual = sym_residual(params, &m);
        if residual > tol * max_abs(&m) {
            return Err(Error::NotMember {
                space: "deformed symmetric",
                residual,
            });
        }
        Ok(Self {
            params: params.clone(),
            m,
        })
    }

    /// Wraps `m` without checking membership. Only meant for diagnostics
    /// that must observe what happens with a corrupted bracket matrix.
    pub fn from_matrix_unchecked(params: &DeformationParams, m: DMatrix<f64>) -> Result<Self> {
        check_square(params, &m)?;
        Ok(Self {
            params: params.clone(),
            m,
        })
    }

    pub fn coords(&self) -> Vec<f64> {
        lower_diag_pairs(self.params.n())
            .map(|(i, j)| self.m[(i, j)])
            .collect()
    }

    pub fn params(&self) -> &DeformationParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    /// `self + lambda * other`
    pub fn pencil(&self, other: &SymElement, lambda: f64) -> Result<SymElement> {
        self.params.check_same(&other.params)?;
        Ok(Self {
            params: self.params.clone(),
            m: &self.m + &other.m * lambda,
        })
    }
}

fn check_square(params: &DeformationParams, m: &DMatrix<f64>) -> Result<()> {
    let n = params.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// Max-abs residual of the entrywise skew relations.
pub fn skew_residual(params: &DeformationParams, m: &DMatrix<f64>) -> f64 {
    let n = params.n();
    let mut r = 0.0_f64;
    for i in 0..n {
        r = r.max(m[(i, i)].abs());
        for j in i + 1..n {
            r = r.max((m[(i, j)] + params.prod(i, j) * m[(j, i)]).abs());
        }
    }
    r
}

/// Max-abs residual of the entrywise symmetric relations.
pub fn sym_residual(params: &DeformationParams, m: &DMatrix<f64>) -> f64 {
    let n = params.n();
    let mut r = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            r = r.max((m[(i, j)] - params.prod(i, j) * m[(j, i)]).abs());
        }
    }
    r
}

/// Residual of the projector form `δ_k M P_k ± P_k Mᵀ δ_k = 0`, each entry
/// `(p, q)` normalised by `max(|δ_k[p]|, |δ_k[q]|)` so that it is measured on
/// the same scale as the entrywise relations. `sign = +1` for the skew space,
/// `-1` for the symmetric one.
fn projector_residual(structure: &StructureMatrices, m: &DMatrix<f64>, sign: f64) -> f64 {
    let n = structure.n();
    let mut r = 0.0_f64;
    for b in &structure.blocks {
        for p in 0..n {
            for q in 0..n {
                let lhs = b.delta[p] * m[(p, q)] * b.proj[q];
                let rhs = b.proj[p] * m[(q, p)] * b.delta[q];
                let entry = lhs + sign * rhs;
                let norm = b.delta[p].abs().max(b.delta[q].abs());
                if norm > 0.0 {
                    r = r.max((entry / norm).abs());
                } else {
                    r = r.max(entry.abs());
                }
            }
        }
    }
    r
}

pub fn skew_residual_projector(params: &DeformationParams, m: &DMatrix<f64>) -> f64 {
    projector_residual(&build_structure(params), m, 1.0)
}

pub fn sym_residual_projector(params: &DeformationParams, m: &DMatrix<f64>) -> f64 {
    projector_residual(&build_structure(params), m, -1.0)
}

/// Membership in the deformed skew-symmetric space; `tol` is relative to the
/// max-abs entry of `m`.
pub fn is_member_skew(params: &DeformationParams, m: &DMatrix<f64>, tol: f64) -> bool {
    check_square(params, m).is_ok() && skew_residual(params, m) <= tol * max_abs(m)
}

pub fn is_member_sym(params: &DeformationParams, m: &DMatrix<f64>, tol: f64) -> bool {
    check_square(params, m).is_ok() && sym_residual(params, m) <= tol * max_abs(m)
}

/// Projector-form membership test, kept separate from the entrywise one so
/// the two can be cross-checked.
pub fn is_member_skew_projector(params: &DeformationParams, m: &DMatrix<f64>, tol: f64) -> bool {
    check_square(params, m).is_ok() && skew_residual_projector(params, m) <= tol * max_abs(m)
}

pub fn is_member_sym_projector(params: &DeformationParams, m: &DMatrix<f64>, tol: f64) -> bool {
    check_square(params, m).is_ok() && sym_residual_projector(params, m) <= tol * max_abs(m)
}

macro_rules! linear_ops {
    ($t:ident) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                assert!(self.params.same_as(&rhs.params), "params mismatch");
                $t {
                    params: self.params.clone(),
                    m: &self.m + &rhs.m,
                }
            }
        }

        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                assert!(self.params.same_as(&rhs.params), "params mismatch");
                $t {
                    params: self.params.clone(),
                    m: &self.m - &rhs.m,
                }
            }
        }

        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                $t {
                    params: self.params.clone(),
                    m: &self.m * rhs,
                }
            }
        }

        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                $t {
                    params: self.params.clone(),
                    m: -&self.m,
                }
            }
        }
    };
}

linear_ops!(SkewElement);
linear_ops!(SymElement);
