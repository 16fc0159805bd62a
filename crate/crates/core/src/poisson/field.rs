use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{DeformationParams, DualPoint, SkewElement};
use crate::error::{Error, Result};

/// A smooth function on the dual space.
///
/// Implementors that know their derivative return it from
/// [`ScalarField::exact_gradient`]; everything else is differentiated by
/// central finite differences in [`gradient`].
pub trait ScalarField: Send + Sync {
    fn eval(&self, rho: &DualPoint) -> f64;

    fn exact_gradient(&self, _rho: &DualPoint) -> Option<SkewElement> {
        None
    }
}

pub type Field = Arc<dyn ScalarField>;

/// The derivative `Df(ρ)` as a skew element: the lower entry `(j, i)` holds
/// `∂f/∂ρ_ij`, so that `Tr(σ Df) = Σ σ_ij ∂f/∂ρ_ij` for strictly-upper `σ`.
pub fn gradient(f: &dyn ScalarField, rho: &DualPoint) -> Result<SkewElement> {
    if let Some(g) = f.exact_gradient(rho) {
        if g.matrix().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("exact gradient".into()));
        }
        return Ok(g);
    }
    finite_difference_gradient(f, rho)
}

/// Step used by the central-difference fallback: `ε^{1/3} (1 + max|ρ|)`.
pub fn fd_step(rho: &DualPoint) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + rho.max_abs())
}

pub fn finite_difference_gradient(f: &dyn ScalarField, rho: &DualPoint) -> Result<SkewElement> {
    let params = rho.params();
    let h = fd_step(rho);
    let base = rho.coords();
    let mut grad = Vec::with_capacity(base.len());
    let mut probe = base.clone();
    for k in 0..base.len() {
        probe[k] = base[k] + h;
        let up = f.eval(&DualPoint::from_coords(params, &probe)?);
        probe[k] = base[k] - h;
        let down = f.eval(&DualPoint::from_coords(params, &probe)?);
        probe[k] = base[k];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!(
                "function value near coordinate {k} during differencing"
            )));
        }
        grad.push((up - down) / (2.0 * h));
    }
    SkewElement::from_coords(params, &grad)
}

/// A single coordinate `ρ ↦ ρ_{ji}` where `(i, j)` is the `index`-th lower
/// pair; its gradient is the corresponding basis element.
#[derive(Debug, Clone)]
pub struct CoordinateField {
    params: DeformationParams,
    index: usize,
}

impl CoordinateField {
    pub fn new(params: &DeformationParams, index: usize) -> Result<Self> {
        if index >= params.skew_dim() {
            return Err(Error::DimensionMismatch {
                expected: params.skew_dim(),
                got: index,
            });
        }
        Ok(Self {
            params: params.clone(),
            index,
        })
    }

    pub fn all(params: &DeformationParams) -> Vec<Self> {
        (0..params.skew_dim())
            .map(|k| Self {
                params: params.clone(),
                index: k,
            })
            .collect()
    }
}

impl ScalarField for CoordinateField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        rho.coords()[self.index]
    }

    fn exact_gradient(&self, _rho: &DualPoint) -> Option<SkewElement> {
        let mut c = vec![0.0; self.params.skew_dim()];
        c[self.index] = 1.0;
        SkewElement::from_coords(&self.params, &c).ok()
    }
}

/// `ρ ↦ Tr(ρZ)` for a fixed skew element `Z`.
#[derive(Debug, Clone)]
pub struct LinearField {
    z: SkewElement,
}

impl LinearField {
    pub fn new(z: SkewElement) -> Self {
        Self { z }
    }
}

impl ScalarField for LinearField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        crate::algebra::trace_pair(rho, &self.z)
    }

    fn exact_gradient(&self, _rho: &DualPoint) -> Option<SkewElement> {
        Some(self.z.clone())
    }
}

/// `½ cᵀQc + bᵀc` in dual coordinates `c`, with `Q` symmetric.
#[derive(Debug, Clone)]
pub struct QuadraticField {
    params: DeformationParams,
    q: DMatrix<f64>,
    linear: Vec<f64>,
}

impl QuadraticField {
    pub fn new(params: &DeformationParams, q: DMatrix<f64>) -> Result<Self> {
        let dim = params.skew_dim();
        if q.nrows() != dim || q.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: q.nrows().max(q.ncols()),
            });
        }
        let q = (&q + q.transpose()) * 0.5;
        Ok(Self {
            params: params.clone(),
            q,
            linear: vec![0.0; dim],
        })
    }

    pub fn diagonal(params: &DeformationParams, diag: &[f64]) -> Result<Self> {
        let dim = params.skew_dim();
        if diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: diag.len(),
            });
        }
        Self::new(params, DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn with_linear(mut self, linear: Vec<f64>) -> Result<Self> {
        if linear.len() != self.linear.len() {
            return Err(Error::DimensionMismatch {
                expected: self.linear.len(),
                got: linear.len(),
            });
        }
        self.linear = linear;
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }
}

impl ScalarField for QuadraticField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        let c = nalgebra::DVector::from_vec(rho.coords());
        0.5 * c.dot(&(&self.q * &c)) + c.iter().zip(&self.linear).map(|(a, b)| a * b).sum::<f64>()
    }

    fn exact_gradient(&self, rho: &DualPoint) -> Option<SkewElement> {
        let c = nalgebra::DVector::from_vec(rho.coords());
        let g = &self.q * c;
        let g: Vec<f64> = g.iter().zip(&self.linear).map(|(a, b)| a + b).collect();
        SkewElement::from_coords(&self.params, &g).ok()
    }
}

/// Pointwise product `f g`; exact gradient by the product rule when both
/// factors have one.
pub struct ProductField {
    f: Field,
    g: Field,
}

impl ProductField {
    pub fn new(f: Field, g: Field) -> Self {
        Self { f, g }
    }
}

impl ScalarField for ProductField {
    fn eval(&self, rho: &DualPoint) -> f64 {
        self.f.eval(rho) * self.g.eval(rho)
    }

    fn exact_gradient(&self, rho: &DualPoint) -> Option<SkewElement> {
        let df = self.f.exact_gradient(rho)?;
        let dg = self.g.exact_gradient(rho)?;
        Some(&(&df * self.g.eval(rho)) + &(&dg * self.f.eval(rho)))
    }
}

/// Wraps a closure; differentiated numerically.
pub struct FnField<F>(pub F);

impl<F> ScalarField for FnField<F>
where
    F: Fn(&DualPoint) -> f64 + Send + Sync,
{
    fn eval(&self, rho: &DualPoint) -> f64 {
        (self.0)(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_gradient_forces_upper_entry() {
        let c = 2.5;
        let p = DeformationParams::new(vec![c]).unwrap();
        let f = CoordinateField::new(&p, 0).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.7]).unwrap();
        let g = gradient(&f, &rho).unwrap();
        assert_eq!(g.matrix()[(1, 0)], 1.0);
        assert_eq!(g.matrix()[(0, 1)], -c);
        // numeric fallback agrees
        let fd = finite_difference_gradient(&FnField(|r: &DualPoint| r.matrix()[(0, 1)]), &rho)
            .unwrap();
        assert!((fd.matrix() - g.matrix()).amax() < 1e-9);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let p = DeformationParams::new(vec![1.0, 0.0]).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.3, -1.0, 2.0]).unwrap();
        let g = gradient(&FnField(|_: &DualPoint| 4.0), &rho).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let p = DeformationParams::new(vec![1.0]).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.0]).unwrap();
        let f = FnField(|r: &DualPoint| r.matrix()[(0, 1)].ln());
        assert!(matches!(gradient(&f, &rho), Err(Error::NonFinite(_))));
    }

    #[test]
    fn quadratic_gradient_matches_differences() {
        let p = DeformationParams::new(vec![0.5, -2.0]).unwrap();
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -1.0, 0.5, 1.0, 0.3, -1.0, 0.3, -4.0]);
        let f = QuadraticField::new(&p, q).unwrap().with_linear(vec![1.0, 0.0, -2.0]).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.3, -1.2, 0.8]).unwrap();
        let exact = f.exact_gradient(&rho).unwrap();
        let fd = finite_difference_gradient(&f, &rho).unwrap();
        assert!((exact.matrix() - fd.matrix()).amax() < 1e-8);
    }

    #[test]
    fn product_rule() {
        let p = DeformationParams::new(vec![1.5, 0.0, 2.0]).unwrap();
        let f: Field = Arc::new(CoordinateField::new(&p, 1).unwrap());
        let g: Field = Arc::new(CoordinateField::new(&p, 4).unwrap());
        let fg = ProductField::new(f, g);
        let rho = DualPoint::from_coords(&p, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let exact = fg.exact_gradient(&rho).unwrap();
        let fd = finite_difference_gradient(&fg, &rho).unwrap();
        assert!((exact.matrix() - fd.matrix()).amax() < 1e-9);
    }
}
