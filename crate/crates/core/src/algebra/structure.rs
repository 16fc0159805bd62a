use nalgebra::{DMatrix, DVector};

use super::params::DeformationParams;

/// One zero-set block: the diagonal matrices `δ_k`, `P_k` and `ι(δ_k)` for a
/// sentinel-extended zero index `k = k_i`, together with the end `k_{i+1}` of
/// the window where `δ_k` is invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBlock {
    pub k: usize,
    pub next: usize,
    pub delta: DVector<f64>,
    pub proj: DVector<f64>,
    pub iota: DVector<f64>,
}

/// Diagonal structure matrices of a parameter sequence. All matrices are
/// diagonal and stored as their diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrices {
    pub delta: DVector<f64>,
    pub blocks: Vec<ZeroBlock>,
}

pub fn build_structure(params: &DeformationParams) -> StructureMatrices {
    let n = params.n();
    let ks = params.zero_set_with_sentinels();
    let delta = DVector::from_fn(n, |p, _| params.prod(0, p));
    let blocks = ks
        .windows(2)
        .map(|w| {
            let (k, next) = (w[0], w[1]);
            let delta_k = DVector::from_fn(n, |p, _| if p >= k { params.prod(k, p) } else { 0.0 });
            let proj = DVector::from_fn(n, |p, _| if p >= k { 1.0 } else { 0.0 });
            let iota = DVector::from_fn(n, |p, _| {
                if (k..next).contains(&p) {
                    let d = delta_k[p];
                    assert!(d != 0.0, "δ_{k} vanishes inside its invertibility window");
                    1.0 / d
                } else {
                    0.0
                }
            });
            ZeroBlock {
                k,
                next,
                delta: delta_k,
                proj,
                iota,
            }
        })
        .collect();
    StructureMatrices { delta, blocks }
}

impl StructureMatrices {
    pub fn n(&self) -> usize {
        self.delta.len()
    }

    pub fn delta_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.delta)
    }

    /// `δ⁻¹` when every parameter is nonzero.
    pub fn delta_inverse(&self) -> Option<DVector<f64>> {
        if self.delta.iter().any(|d| *d == 0.0) {
            None
        } else {
            Some(self.delta.map(|d| 1.0 / d))
        }
    }

    /// `δ̃ = δ_{k_0} + ... + δ_{k_N}`; invertible for every parameter choice.
    pub fn delta_tilde(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        for b in &self.blocks {
            out += &b.delta;
        }
        out
    }

    /// `P_{k_i} - P_{k_{i+1}}` as a diagonal of ones on the window.
    pub fn window(&self, i: usize) -> DVector<f64> {
        let b = &self.blocks[i];
        DVector::from_fn(self.n(), |p, _| if (b.k..b.next).contains(&p) { 1.0 } else { 0.0 })
    }
}

/// `diag(d) * m`
pub(crate) fn diag_left(d: &DVector<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        row *= d[r];
    }
    out
}

/// `m * diag(d)`
pub(crate) fn diag_right(m: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (c, mut col) in out.column_iter_mut().enumerate() {
        col *= d[c];
    }
    out
}
