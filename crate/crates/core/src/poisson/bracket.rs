use nalgebra::DMatrix;

use super::field::{gradient, ScalarField};
use crate::algebra::{bracket, lower_pairs, pi_project, trace_pair, DualPoint, SkewElement, SymElement};
use crate::error::Result;

/// `{f, g}_S(ρ) = ⟨ρ, [Df(ρ), Dg(ρ)]_S⟩`.
pub fn lie_poisson_bracket(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    rho: &DualPoint,
    s: &SymElement,
) -> Result<f64> {
    let df = gradient(f, rho)?;
    let dg = gradient(g, rho)?;
    bracket_of_gradients(&df, &dg, rho, s)
}

pub fn bracket_of_gradients(
    df: &SkewElement,
    dg: &SkewElement,
    rho: &DualPoint,
    s: &SymElement,
) -> Result<f64> {
    rho.params().check_same(s.params())?;
    Ok(trace_pair(rho, &bracket(df, dg, s)?))
}

/// Natural magnitude of a bracket value, `max|ρ| max|Df| max|Dg| max|S|`;
/// residual checks on brackets are taken relative to this.
pub fn bracket_scale(rho: &DualPoint, df: &SkewElement, dg: &SkewElement, s: &SymElement) -> f64 {
    rho.max_abs() * df.max_abs() * dg.max_abs() * s.max_abs()
}

/// `ad*_X ρ = π(ρXS - SXρ)`.
pub fn coadjoint(x: &SkewElement, rho: &DualPoint, s: &SymElement) -> Result<DualPoint> {
    x.params().check_same(rho.params())?;
    x.params().check_same(s.params())?;
    let (xm, r, sm) = (x.matrix(), rho.matrix(), s.matrix());
    pi_project(x.params(), &(r * xm * sm - sm * xm * r))
}

/// The coordinate Poisson tensor `P_pq = {c_p, c_q}_S(ρ)` in dual
/// coordinates.
pub fn poisson_tensor(rho: &DualPoint, s: &SymElement) -> Result<DMatrix<f64>> {
    let params = rho.params();
    params.check_same(s.params())?;
    let basis = SkewElement::basis(params);
    let dim = basis.len();
    let mut out = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        for q in p + 1..dim {
            let v = trace_pair(rho, &bracket(&basis[p], &basis[q], s)?);
            out[(p, q)] = v;
            out[(q, p)] = -v;
        }
    }
    Ok(out)
}

/// Labels `rho_ij` (1-based) in dual coordinate order.
pub fn coordinate_labels(n: usize) -> Vec<String> {
    lower_pairs(n)
        .map(|(i, j)| format!("rho_{}{}", j + 1, i + 1))
        .collect()
}
