use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::casimir::{functional_to_gradient, reflect};
use super::field::ScalarField;
use crate::algebra::{build_structure, diag_left, diag_right, DeformationParams, DualPoint, SkewElement, SymElement};
use crate::error::{Error, Result};
use crate::linalg::checked_inverse;

/// The pencil `S₁ + λS₂`.
#[derive(Debug, Clone)]
pub struct PencilSpec {
    pub s1: SymElement,
    pub s2: SymElement,
}

impl PencilSpec {
    pub fn new(s1: SymElement, s2: SymElement) -> Result<Self> {
        s1.params().check_same(s2.params())?;
        Ok(Self { s1, s2 })
    }

    pub fn params(&self) -> &DeformationParams {
        self.s1.params()
    }

    pub fn at(&self, lambda: f64) -> Result<SymElement> {
        self.s1.pencil(&self.s2, lambda)
    }
}

type Series = Vec<DMatrix<f64>>;

/// Product of two matrix polynomials, truncated after `order`.
fn series_mul(a: &Series, b: &Series, order: usize) -> Series {
    let n = a[0].nrows();
    (0..=order)
        .map(|k| {
            let mut acc = DMatrix::zeros(n, n);
            for i in 0..=k {
                acc += &a[i] * &b[k - i];
            }
            acc
        })
        .collect()
}

fn series_pow(a: &Series, e: usize, order: usize) -> Series {
    let n = a[0].nrows();
    let mut out: Series = (0..=order)
        .map(|k| if k == 0 { DMatrix::identity(n, n) } else { DMatrix::zeros(n, n) })
        .collect();
    for _ in 0..e {
        out = series_mul(&out, a, order);
    }
    out
}

#[derive(Debug)]
struct PencilData {
    l: usize,
    order: usize,
    params: DeformationParams,
    /// Neumann terms `T_k = S₁⁻¹(-S₂S₁⁻¹)^k`.
    neumann: Series,
    delta: DVector<f64>,
    delta_inv: DVector<f64>,
}

impl PencilData {
    fn reduced(&self, rho: &DualPoint) -> Series {
        let r = reflect(rho.matrix(), &self.delta, &self.delta_inv);
        self.neumann.iter().map(|t| &r * t).collect()
    }
}

/// Coefficient of `λ^k` in `C_l^{S₁+λS₂}(ρ)`.
#[derive(Debug, Clone)]
pub struct PencilCoefficientField {
    data: Arc<PencilData>,
    k: usize,
}

impl PencilCoefficientField {
    pub fn index(&self) -> usize {
        self.k
    }

    pub fn casimir_order(&self) -> usize {
        self.data.l
    }

    /// All coefficients `0..=order` at once.
    pub fn all_values(&self, rho: &DualPoint) -> Vec<f64> {
        let d = &self.data;
        let a = d.reduced(rho);
        series_pow(&a, 2 * d.l, d.order)
            .iter()
            .map(|m| m.trace() / (2 * d.l) as f64)
            .collect()
    }
}

impl ScalarField for PencilCoefficientField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        let d = &self.data;
        let a = d.reduced(rho);
        series_pow(&a, 2 * d.l, self.k)[self.k].trace() / (2 * d.l) as f64
    }

    fn exact_gradient(&self, rho: &DualPoint) -> Option<SkewElement> {
        let d = &self.data;
        let a = d.reduced(rho);
        let p = series_pow(&a, 2 * d.l - 1, self.k);
        let g = series_mul(&d.neumann, &p, self.k).swap_remove(self.k);
        let g = &g - diag_right(&diag_left(&d.delta_inv, &g.transpose()), &d.delta);
        Some(functional_to_gradient(&d.params, &g))
    }
}

/// The λ-expansion coefficients `0..=order` of `C_l^{S₁+λS₂}`, from the
/// truncated Neumann series of `(S₁+λS₂)⁻¹`.
pub fn pencil_integrals(pencil: &PencilSpec, l: usize, order: usize) -> Result<Vec<PencilCoefficientField>> {
    if l == 0 {
        return Err(Error::Precondition("Casimir order must be at least 1".into()));
    }
    let params = pencil.params();
    params.require_nonzero()?;
    let s1_inv = checked_inverse(pencil.s1.matrix())?;
    let step = -(pencil.s2.matrix() * &s1_inv);
    let mut neumann = Vec::with_capacity(order + 1);
    neumann.push(s1_inv);
    for k in 1..=order {
        let next = &neumann[k - 1] * &step;
        neumann.push(next);
    }
    let structure = build_structure(params);
    let data = Arc::new(PencilData {
        l,
        order,
        params: params.clone(),
        neumann,
        delta_inv: structure.delta_inverse().expect("all parameters nonzero"),
        delta: structure.delta,
    });
    Ok((0..=order)
        .map(|k| PencilCoefficientField { data: Arc::clone(&data), k })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::bracket::lie_poisson_bracket;
    use crate::poisson::casimir::casimir;
    use crate::poisson::field::finite_difference_gradient;
    use num_complex::Complex64;

    fn setup() -> (PencilSpec, DualPoint) {
        let p = DeformationParams::new(vec![1.2, -0.7, 0.9]).unwrap();
        let s1 = SymElement::from_coords(&p, &[2.0, 0.3, 1.5, -0.2, 0.1, 1.8, 0.4, 0.0, -0.3, 2.2]).unwrap();
        let s2 = SymElement::from_coords(&p, &[0.5, -0.4, 1.0, 0.2, 0.3, -0.6, 0.1, 0.7, 0.2, 0.9]).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.4, -0.3, 0.8, 0.5, -0.9, 0.2]).unwrap();
        (PencilSpec::new(s1, s2).unwrap(), rho)
    }

    #[test]
    fn coefficient_zero_is_the_casimir() {
        let (pencil, rho) = setup();
        for l in 1..=2 {
            let fields = pencil_integrals(&pencil, l, 2).unwrap();
            let c = casimir(l, &rho, &pencil.s1).unwrap();
            assert!((fields[0].eval(&rho) - c).abs() < 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn vanishing_second_structure() {
        let (pencil, rho) = setup();
        let flat = PencilSpec::new(pencil.s1.clone(), SymElement::zero(pencil.params())).unwrap();
        let values = pencil_integrals(&flat, 1, 3).unwrap()[0].all_values(&rho);
        assert!(values[0].abs() > 0.0);
        assert!(values[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn first_coefficient_is_minus_displayed_trace() {
        // d/dλ of Tr(M(λ)^{2l})/(2l) at 0 is -Tr(M^{2l} S₂S₁⁻¹)
        let (pencil, rho) = setup();
        let p = pencil.params();
        let st = build_structure(p);
        let r = reflect(rho.matrix(), &st.delta, &st.delta_inverse().unwrap());
        let s1_inv = pencil.s1.matrix().clone().try_inverse().unwrap();
        for l in 1..=2 {
            let m = (&r * &s1_inv).pow(2 * l as u32);
            let displayed = (m * pencil.s2.matrix() * &s1_inv).trace();
            let c1 = pencil_integrals(&pencil, l, 1).unwrap()[1].eval(&rho);
            assert!((c1 + displayed).abs() < 1e-12 * displayed.abs().max(1.0));
        }
    }

    fn direct(pencil: &PencilSpec, l: usize, rho: &DualPoint, lambda: f64) -> f64 {
        casimir(l, rho, &pencil.at(lambda).unwrap()).unwrap()
    }

    #[test]
    fn low_orders_match_lambda_sampling() {
        let (pencil, rho) = setup();
        let h = 1e-2;
        for l in 1..=2 {
            let [m2, m1, p1, p2] = [-2.0, -1.0, 1.0, 2.0].map(|t| direct(&pencil, l, &rho, t * h));
            // four-node fit of value and slope at 0
            let c0 = (-m2 + 4.0 * m1 + 4.0 * p1 - p2) / 6.0;
            let c1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
            let got = pencil_integrals(&pencil, l, 1).unwrap()[0].all_values(&rho);
            assert!((got[0] - c0).abs() < 1e-6 * got[0].abs(), "l={l}");
            assert!((got[1] - c1).abs() < 1e-6 * got[1].abs(), "l={l}");
        }
    }

    /// Taylor coefficients by a contour integral of the exact pencil Casimir
    /// evaluated at complex λ.
    fn cauchy_coefficients(pencil: &PencilSpec, l: usize, rho: &DualPoint, order: usize) -> Vec<f64> {
        let p = pencil.params();
        let st = build_structure(p);
        let r = reflect(rho.matrix(), &st.delta, &st.delta_inverse().unwrap()).map(|v| Complex64::new(v, 0.0));
        let (s1, s2) = (pencil.s1.matrix().map(|v| Complex64::new(v, 0.0)), pencil.s2.matrix().map(|v| Complex64::new(v, 0.0)));
        let radius = 0.05;
        let nodes = 64;
        let mut out = vec![0.0; order + 1];
        for q in 0..nodes {
            let z = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * q as f64 / nodes as f64);
            let s = &s1 + &s2 * z;
            let f = (&r * s.try_inverse().unwrap()).pow(2 * l as u32).trace() / (2 * l) as f64;
            for (k, c) in out.iter_mut().enumerate() {
                *c += (f / z.powu(k as u32)).re / nodes as f64;
            }
        }
        out
    }

    #[test]
    fn higher_orders_match_contour_integral() {
        let (pencil, rho) = setup();
        for l in 1..=2 {
            let got = pencil_integrals(&pencil, l, 4).unwrap()[0].all_values(&rho);
            let oracle = cauchy_coefficients(&pencil, l, &rho, 4);
            for k in 0..=4 {
                assert!((got[k] - oracle[k]).abs() < 1e-8 * got[k].abs().max(1.0), "l={l} k={k}");
            }
        }
    }

    #[test]
    fn gradients_match_differences() {
        let (pencil, rho) = setup();
        for l in 1..=2 {
            for f in pencil_integrals(&pencil, l, 3).unwrap() {
                let exact = f.exact_gradient(&rho).unwrap();
                let fd = finite_difference_gradient(&f, &rho).unwrap();
                let rel = (exact.matrix() - fd.matrix()).amax() / exact.max_abs();
                assert!(rel < 1e-6, "l={l} k={} rel={rel}", f.index());
            }
        }
    }

    #[test]
    fn coefficients_are_in_involution() {
        let (pencil, rho) = setup();
        let mut fields = pencil_integrals(&pencil, 1, 2).unwrap();
        fields.extend(pencil_integrals(&pencil, 2, 2).unwrap());
        for s in [&pencil.s1, &pencil.s2] {
            for f in &fields {
                for g in &fields {
                    let v = lie_poisson_bracket(f, g, &rho, s).unwrap();
                    assert!(v.abs() < 1e-9, "v={v}");
                }
            }
        }
    }
}
