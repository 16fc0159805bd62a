use nalgebra::{DMatrix, DVector};

use super::field::ScalarField;
use crate::algebra::{
    build_structure, diag_left, diag_right, DeformationParams, DualPoint, SkewElement, SymElement,
};
use crate::error::{Error, Result};
use crate::linalg::checked_inverse;

/// `ρ - δ⁻¹ρᵀδ`
pub(crate) fn reflect(rho: &DMatrix<f64>, delta: &DVector<f64>, delta_inv: &DVector<f64>) -> DMatrix<f64> {
    rho - diag_right(&diag_left(delta_inv, &rho.transpose()), delta)
}

/// The skew element representing the linear functional `σ ↦ Tr(G σ)` on
/// strictly upper-triangular `σ`.
pub(crate) fn functional_to_gradient(params: &DeformationParams, g: &DMatrix<f64>) -> SkewElement {
    SkewElement::from_lower_part(params, g).expect("square matrix of matching size")
}

/// The generic Casimir `C_l(ρ) = (1/2l) Tr(((ρ - δ⁻¹ρᵀδ) S⁻¹)^{2l})`.
///
/// Needs every parameter nonzero and `S` invertible.
#[derive(Debug, Clone)]
pub struct CasimirField {
    l: usize,
    params: DeformationParams,
    s_inv: DMatrix<f64>,
    delta: DVector<f64>,
    delta_inv: DVector<f64>,
}

impl CasimirField {
    pub fn new(l: usize, s: &SymElement) -> Result<Self> {
        if l == 0 {
            return Err(Error::Precondition("Casimir order must be at least 1".into()));
        }
        let params = s.params();
        params.require_nonzero()?;
        let structure = build_structure(params);
        let delta_inv = structure.delta_inverse().expect("all parameters nonzero");
        Ok(Self {
            l,
            params: params.clone(),
            s_inv: checked_inverse(s.matrix())?,
            delta: structure.delta,
            delta_inv,
        })
    }

    pub fn order(&self) -> usize {
        self.l
    }

    fn reduced(&self, rho: &DualPoint) -> DMatrix<f64> {
        reflect(rho.matrix(), &self.delta, &self.delta_inv) * &self.s_inv
    }
}

impl ScalarField for CasimirField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        let m = self.reduced(rho);
        m.pow((2 * self.l) as u32).trace() / (2 * self.l) as f64
    }

    fn exact_gradient(&self, rho: &DualPoint) -> Option<SkewElement> {
        let m = self.reduced(rho);
        let q = &self.s_inv * m.pow((2 * self.l - 1) as u32);
        let g = &q - diag_right(&diag_left(&self.delta_inv, &q.transpose()), &self.delta);
        Some(functional_to_gradient(&self.params, &g))
    }
}

pub fn casimir(l: usize, rho: &DualPoint, s: &SymElement) -> Result<f64> {
    rho.params().check_same(s.params())?;
    Ok(CasimirField::new(l, s)?.eval(rho))
}

/// The rescaled Casimir family `C̃_l = (a_1⋯a_{n-1})^l C_l`, written without
/// `δ⁻¹` so that it stays meaningful when parameters vanish:
///
/// `C̃_l = (1/2l) Tr(N^l)` with
/// `N = Π(ρS⁻¹)² - ηKδρS⁻¹ - ρS⁻¹ηKδ + ηK²δ`, `K = (S⁻¹ρ)ᵀ`,
/// `Π = a_1⋯a_{n-1}` and `η_ii = a_i⋯a_{n-1}` built from suffix products.
#[derive(Debug, Clone)]
pub struct DegenerateCasimirField {
    l: usize,
    params: DeformationParams,
    s_inv: DMatrix<f64>,
    s_inv_t: DMatrix<f64>,
    eta: DVector<f64>,
    delta: DVector<f64>,
    total: f64,
}

struct DegenerateParts {
    u: DMatrix<f64>,
    k: DMatrix<f64>,
    n: DMatrix<f64>,
}

impl DegenerateCasimirField {
    pub fn new(l: usize, s: &SymElement) -> Result<Self> {
        if l == 0 {
            return Err(Error::Precondition("Casimir order must be at least 1".into()));
        }
        let params = s.params();
        let n = params.n();
        let s_inv = checked_inverse(s.matrix())?;
        Ok(Self {
            l,
            params: params.clone(),
            s_inv_t: s_inv.transpose(),
            s_inv,
            eta: DVector::from_fn(n, |p, _| params.prod(p, n - 1)),
            delta: build_structure(params).delta,
            total: params.prod(0, n - 1),
        })
    }

    pub fn order(&self) -> usize {
        self.l
    }

    fn parts(&self, rho: &DualPoint) -> DegenerateParts {
        let r = rho.matrix();
        let u = r * &self.s_inv;
        let k = (&self.s_inv * r).transpose();
        let eta_k = diag_left(&self.eta, &k);
        let n = &u * &u * self.total - diag_right(&eta_k, &self.delta) * &u
            - diag_right(&(&u * &eta_k), &self.delta)
            + diag_right(&(&eta_k * &k), &self.delta);
        DegenerateParts { u, k, n }
    }
}

impl ScalarField for DegenerateCasimirField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        let parts = self.parts(rho);
        parts.n.pow(self.l as u32).trace() / (2 * self.l) as f64
    }

    fn exact_gradient(&self, rho: &DualPoint) -> Option<SkewElement> {
        // dC̃ = (1/2) Tr(N^{l-1} dN); every term of dN is L dρ R or L dρᵀ R,
        // contributing R L or (R L)ᵀ to the gradient functional.
        let DegenerateParts { u, k, n } = self.parts(rho);
        let m = n.pow((self.l - 1) as u32);
        let (si, sit) = (&self.s_inv, &self.s_inv_t);
        let eta = |x: &DMatrix<f64>| diag_left(&self.eta, x);
        let eta_r = |x: &DMatrix<f64>| diag_right(x, &self.eta);
        let del = |x: &DMatrix<f64>| diag_left(&self.delta, x);
        let del_r = |x: &DMatrix<f64>| diag_right(x, &self.delta);

        let m_eta = eta_r(&m);
        let eta_k_delta = del_r(&eta(&k));
        let mut g = (si * &u * &m + si * &m * &u) * self.total;
        g -= (sit * del(&u) * &m_eta).transpose();
        g -= si * &m_eta * del_r(&k);
        g -= si * &eta_k_delta * &m;
        g -= (sit * eta_r(&del(&(&m * &u)))).transpose();
        g += (sit * del_r(&k) * &m_eta).transpose();
        g += (sit * del(&(&m_eta * &k))).transpose();
        Some(functional_to_gradient(&self.params, &(g * 0.5)))
    }
}

pub fn casimir_degenerate(l: usize, rho: &DualPoint, s: &SymElement) -> Result<f64> {
    rho.params().check_same(s.params())?;
    Ok(DegenerateCasimirField::new(l, s)?.eval(rho))
}
