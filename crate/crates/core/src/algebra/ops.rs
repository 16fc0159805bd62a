use nalgebra::DMatrix;

use super::dual::DualPoint;
use super::elements::{max_abs, skew_residual, sym_residual, SkewElement, SymElement};
use super::params::DeformationParams;
use super::structure::{build_structure, diag_left, diag_right, StructureMatrices};
use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, rcond, SINGULAR_RCOND};

/// `[X, Y]_S = XSY - YSX`.
pub fn bracket(x: &SkewElement, y: &SkewElement, s: &SymElement) -> Result<SkewElement> {
    x.params().check_same(y.params())?;
    x.params().check_same(s.params())?;
    let m = bracket_matrix(x.matrix(), y.matrix(), s.matrix());
    Ok(SkewElement::from_matrix_unchecked(x.params(), m))
}

pub fn bracket_matrix(x: &DMatrix<f64>, y: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    x * s * y - y * s * x
}

/// `Σ_i ι(δ_{k_i}) Aᵀ δ_{k_i}`
fn iota_transpose_sum(structure: &StructureMatrices, a: &DMatrix<f64>) -> DMatrix<f64> {
    let at = a.transpose();
    let n = structure.n();
    let mut out = DMatrix::zeros(n, n);
    for b in &structure.blocks {
        out += diag_right(&diag_left(&b.iota, &at), &b.delta);
    }
    out
}

/// Projection of an arbitrary matrix into the skew space:
/// `A - Σ_i ι(δ_{k_i}) Aᵀ δ_{k_i} - Σ_{i≥1} (P_{k_{i-1}} - P_{k_i}) A P_{k_i}`.
///
/// With all parameters nonzero this is `A - δ⁻¹Aᵀδ`, so members map to twice
/// themselves.
pub fn skew_part(params: &DeformationParams, a: &DMatrix<f64>) -> Result<SkewElement> {
    let n = params.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.nrows().max(a.ncols()),
        });
    }
    let structure = build_structure(params);
    let mut out = a - iota_transpose_sum(&structure, a);
    for i in 1..structure.blocks.len() {
        let window = &structure.blocks[i - 1].proj - &structure.blocks[i].proj;
        out -= diag_right(&diag_left(&window, a), &structure.blocks[i].proj);
    }
    Ok(SkewElement::from_matrix_unchecked(params, out))
}

/// The dual projection `π(M) = π⁺(M - Σ_i ι(δ_{k_i}) Mᵀ δ_{k_i})`, which
/// satisfies `Tr(π(M) Y) = Tr(M Y)` for every skew member `Y`.
pub fn pi_project(params: &DeformationParams, m: &DMatrix<f64>) -> Result<DualPoint> {
    let n = params.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows().max(m.ncols()),
        });
    }
    let structure = build_structure(params);
    let corrected = m - iota_transpose_sum(&structure, m);
    Ok(DualPoint::truncate(params, &corrected))
}

/// The pairing `⟨ρ, X⟩ = Tr(ρX) = Σ_{i<j} ρ_ij X_ji`.
pub fn trace_pair(rho: &DualPoint, x: &SkewElement) -> f64 {
    let (r, m) = (rho.matrix(), x.matrix());
    let n = r.nrows();
    debug_assert_eq!(n, m.nrows());
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += r[(i, j)] * m[(j, i)];
        }
    }
    acc
}

/// Membership residuals of the four alternating products built from `X` and
/// `S`, each relative to the max-abs entry of the product.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    pub k: usize,
    /// `S(XS)^{2k-1}` in the skew space
    pub s_xs_odd: f64,
    /// `X(SX)^{2k}` in the skew space
    pub x_sx_even: f64,
    /// `X(SX)^{2k-1}` in the symmetric space
    pub x_sx_odd: f64,
    /// `S(XS)^{2k}` in the symmetric space
    pub s_xs_even: f64,
}

impl ProductReport {
    pub fn max_residual(&self) -> f64 {
        self.s_xs_odd
            .max(self.x_sx_even)
            .max(self.x_sx_odd)
            .max(self.s_xs_even)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

fn relative(residual: f64, m: &DMatrix<f64>) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        residual
    } else {
        residual / scale
    }
}

pub fn product_membership_check(x: &SkewElement, s: &SymElement, k: usize) -> Result<ProductReport> {
    if k == 0 {
        return Err(Error::Precondition("product power k must be at least 1".into()));
    }
    x.params().check_same(s.params())?;
    let params = x.params();
    let (xm, sm) = (x.matrix(), s.matrix());
    let xs = xm * sm;
    let sx = sm * xm;
    let xs_odd = xs.pow((2 * k - 1) as u32);
    let sx_odd = sx.pow((2 * k - 1) as u32);
    let xs_even = &xs_odd * &xs;
    let sx_even = &sx_odd * &sx;
    let s_xs_odd = sm * &xs_odd;
    let x_sx_even = xm * &sx_even;
    let x_sx_odd = xm * &sx_odd;
    let s_xs_even = sm * &xs_even;
    Ok(ProductReport {
        k,
        s_xs_odd: relative(skew_residual(params, &s_xs_odd), &s_xs_odd),
        x_sx_even: relative(skew_residual(params, &x_sx_even), &x_sx_even),
        x_sx_odd: relative(sym_residual(params, &x_sx_odd), &x_sx_odd),
        s_xs_even: relative(sym_residual(params, &s_xs_even), &s_xs_even),
    })
}

/// Either kind of structured matrix, for checks that apply to both.
#[derive(Debug, Clone, Copy)]
pub enum ElementRef<'a> {
    Skew(&'a SkewElement),
    Sym(&'a SymElement),
}

#[derive(Debug, Clone)]
pub struct InverseReport {
    pub inverse: DMatrix<f64>,
    /// Membership residual of the inverse relative to its max-abs entry.
    pub residual: f64,
    pub rcond: f64,
}

impl InverseReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

pub fn inverse_membership_check(m: ElementRef<'_>) -> Result<InverseReport> {
    let (params, mat) = match m {
        ElementRef::Skew(x) => (x.params(), x.matrix()),
        ElementRef::Sym(s) => (s.params(), s.matrix()),
    };
    let rc = rcond(mat);
    if !(rc >= SINGULAR_RCOND) {
        return Err(Error::Singular { rcond: rc });
    }
    let inverse = checked_inverse(mat)?;
    let raw = match m {
        ElementRef::Skew(_) => skew_residual(params, &inverse),
        ElementRef::Sym(_) => sym_residual(params, &inverse),
    };
    Ok(InverseReport {
        residual: relative(raw, &inverse),
        inverse,
        rcond: rc,
    })
}
