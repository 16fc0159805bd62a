//! Random draws of structured elements for property checks and
//! verification suites. Coordinates are uniform on `[-1, 1]`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{DeformationParams, DualPoint, SkewElement, SymElement};

fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub fn skew<R: Rng + ?Sized>(params: &DeformationParams, rng: &mut R) -> SkewElement {
    SkewElement::from_coords(params, &uniform_vec(rng, params.skew_dim()))
        .expect("coordinate length matches")
}

/// Dense member of the symmetric space with diagonal kept away from zero.
pub fn sym<R: Rng + ?Sized>(params: &DeformationParams, rng: &mut R) -> SymElement {
    let mut c = uniform_vec(rng, params.sym_dim());
    for i in 0..params.n() {
        // diagonal coordinate (i, i) sits at i(i+1)/2 + i
        let k = i * (i + 1) / 2 + i;
        c[k] = rng.gen_range(0.5..=1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    SymElement::from_coords(params, &c).expect("coordinate length matches")
}

pub fn sym_diagonal<R: Rng + ?Sized>(params: &DeformationParams, rng: &mut R) -> SymElement {
    let d: Vec<f64> = (0..params.n())
        .map(|_| rng.gen_range(0.5..=1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    SymElement::diagonal(params, &d).expect("diagonal length matches")
}

pub fn dual<R: Rng + ?Sized>(params: &DeformationParams, rng: &mut R) -> DualPoint {
    DualPoint::from_coords(params, &uniform_vec(rng, params.skew_dim()))
        .expect("coordinate length matches")
}

pub fn matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0))
}
