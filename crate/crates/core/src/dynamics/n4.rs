//! Built-in `n = 4` systems: the deformed rigid body with Hamiltonian
//! `H ∝ C₁^W` and its Clebsch-like contraction at `a₁ = 0`.
//!
//! Conventions: the bracket matrix is `S = diag(1/s₁, …, 1/s₄)` and the
//! second structure `W = diag(1/w₁, …, 1/w₄)`; `s_i`, `w_i` are the stored
//! numbers. In vector notation `x = (ρ12, ρ13, ρ14)`, `y = (ρ34, −ρ24, ρ23)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use super::HamiltonianSystem;
use crate::algebra::{build_structure, DeformationParams, DualPoint, SymElement};
use crate::error::{Error, Result};
use crate::poisson::{CasimirField, DegenerateCasimirField, Field, QuadraticField};

type V3 = [f64; 3];

fn cross(u: V3, v: V3) -> V3 {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn dot(u: V3, v: V3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn hadamard(d: V3, v: V3) -> V3 {
    [d[0] * v[0], d[1] * v[1], d[2] * v[2]]
}

fn scale(c: f64, v: V3) -> V3 {
    v.map(|e| c * e)
}

fn sub(u: V3, v: V3) -> V3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

/// A point of the six-dimensional dual space in `(x, y)` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N4State {
    pub x: V3,
    pub y: V3,
}

// dual coordinate order is ρ12, ρ13, ρ23, ρ14, ρ24, ρ34
impl N4State {
    pub fn from_dual(rho: &DualPoint) -> Result<Self> {
        if rho.params().n() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: rho.params().n(),
            });
        }
        let c = rho.coords();
        Ok(Self {
            x: [c[0], c[1], c[3]],
            y: [c[5], -c[4], c[2]],
        })
    }

    pub fn to_dual(&self, params: &DeformationParams) -> Result<DualPoint> {
        let (x, y) = (self.x, self.y);
        DualPoint::from_coords(params, &[x[0], x[1], y[2], x[2], -y[1], y[0]])
    }

    /// `(x₁, x₂, x₃, y₁, y₂, y₃)`.
    pub fn to_array(&self) -> [f64; 6] {
        [self.x[0], self.x[1], self.x[2], self.y[0], self.y[1], self.y[2]]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            x: [v[0], v[1], v[2]],
            y: [v[3], v[4], v[5]],
        }
    }
}

/// Position of each of `x₁, x₂, x₃, y₁, y₂, y₃` among the dual coordinates,
/// with the sign relating them.
pub const XY_TO_DUAL: [(usize, f64); 6] = [(0, 1.0), (1, 1.0), (3, 1.0), (5, 1.0), (4, -1.0), (2, 1.0)];

fn check_nonzero(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|e| !e.is_finite() || *e == 0.0) {
        Some(i) => Err(Error::InvalidParams(format!("{name}_{} must be finite and nonzero", i + 1))),
        None => Ok(()),
    }
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Parameters of the rigid-body system: deformation `a`, bracket `s`,
/// Hamiltonian structure `w`, all nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyParams {
    pub a: [f64; 3],
    pub s: [f64; 4],
    pub w: [f64; 4],
}

impl RigidBodyParams {
    pub fn new(a: [f64; 3], s: [f64; 4], w: [f64; 4]) -> Result<Self> {
        check_nonzero("a", &a)?;
        check_nonzero("s", &s)?;
        check_nonzero("w", &w)?;
        Ok(Self { a, s, w })
    }

    /// `|a_i| ∈ [0.5, 1.5]` with random signs, `s_i, w_i ∈ [0.5, 2]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = [(); 3].map(|_| rng.gen_range(0.5..=1.5) * random_sign(rng));
        let s = [(); 4].map(|_| rng.gen_range(0.5..=2.0));
        let w = [(); 4].map(|_| rng.gen_range(0.5..=2.0));
        Self { a, s, w }
    }

    pub fn deformation(&self) -> DeformationParams {
        DeformationParams::new(self.a.to_vec()).expect("three finite parameters")
    }

    pub fn bracket_matrix(&self) -> SymElement {
        SymElement::diagonal(&self.deformation(), &self.s.map(|v| 1.0 / v)).expect("diagonal of length 4")
    }

    pub fn second_matrix(&self) -> SymElement {
        SymElement::diagonal(&self.deformation(), &self.w.map(|v| 1.0 / v)).expect("diagonal of length 4")
    }

    pub fn c1(&self, z: &N4State) -> f64 {
        c1_closed(self.a, self.s, z)
    }

    fn pfaffian_term(&self, z: &N4State) -> f64 {
        let [a1, a2, a3] = self.a;
        let [s1, s2, s3, s4] = self.s;
        let (x, y) = (z.x, z.y);
        let q = x[1] * y[1] + x[2] * y[2] + a2 * x[0] * y[0];
        s1 * s2 * s3 * s4 / (a1 * a2 * a2 * a3) * q * q
    }

    /// `C2 = ½C1² − (s₁s₂s₃s₄/(a₁a₂²a₃))(x₂y₂ + x₃y₃ + a₂x₁y₁)²`.
    pub fn c2(&self, z: &N4State) -> f64 {
        let c1 = self.c1(z);
        0.5 * c1 * c1 - self.pfaffian_term(z)
    }

    /// The commonly quoted `2C1 − 4(s₁s₂s₃s₄/(a₁a₂²a₃))(…)²`. It is not a
    /// Casimir: the true `4·C2` has `2C1²` in place of `2C1`.
    pub fn c2_as_printed(&self, z: &N4State) -> f64 {
        2.0 * self.c1(z) - 4.0 * self.pfaffian_term(z)
    }

    fn h_coefficients(&self) -> [f64; 6] {
        let [a1, a2, a3] = self.a;
        let [w1, w2, w3, w4] = self.w;
        [
            w1 * w2 * a2 * a3,
            w1 * w3 * a3,
            w1 * w4,
            w3 * w4 * a1 * a2,
            w2 * w4 * a1,
            w2 * w3 * a1 * a3,
        ]
    }

    fn i_coefficients(&self) -> [f64; 6] {
        let [a1, a2, a3] = self.a;
        let [s1, s2, s3, s4] = self.s;
        let r = |i: usize| self.s[i] / self.w[i];
        [
            (r(0) + r(1)) * s1 * s2 * a2 * a3,
            (r(0) + r(2)) * s1 * s3 * a3,
            (r(0) + r(3)) * s1 * s4,
            (r(2) + r(3)) * s3 * s4 * a1 * a2,
            (r(1) + r(3)) * s2 * s4 * a1,
            (r(1) + r(2)) * s2 * s3 * a1 * a3,
        ]
    }

    /// `H = ½ Σ h_k z_k²` over `z = (x, y)`.
    pub fn hamiltonian(&self, z: &N4State) -> f64 {
        let v = z.to_array();
        0.5 * self.h_coefficients().iter().zip(v).map(|(h, e)| h * e * e).sum::<f64>()
    }

    pub fn integral_i(&self, z: &N4State) -> f64 {
        let v = z.to_array();
        self.i_coefficients().iter().zip(v).map(|(h, e)| h * e * e).sum()
    }

    pub fn hamiltonian_field(&self) -> QuadraticField {
        xy_diagonal_field(&self.deformation(), self.h_coefficients())
    }

    pub fn integral_field(&self) -> QuadraticField {
        xy_diagonal_field(&self.deformation(), self.i_coefficients().map(|v| 2.0 * v))
    }

    /// The vector equations of motion generated by `H` in the bracket `S`.
    pub fn rhs(&self, z: &N4State) -> N4State {
        let [a1, a2, a3] = self.a;
        let [s1, s2, s3, s4] = self.s;
        let [w1, w2, w3, w4] = self.w;
        let delta_t = [a1, a1 * a2, a1 * a2 * a3];
        let w_inv = [w2, w3, w4];
        let ws = [w2 / s2, w3 / s3, w4 / s4];
        let b = [1.0, 1.0, a3];
        let (x, y) = (z.x, z.y);

        let gap = ws.map(|v| v - w1 / s1);
        let dx = hadamard(hadamard(delta_t, gap), cross(hadamard(w_inv, x), hadamard(b, y)));
        // a₂a₃A⁻¹B⁻¹ (w₁B(x × W̃⁻¹S̃x) − a₁W̃⁻¹(y × W̃⁻¹S̃y))
        let front = [a3, a2 * a3, a2];
        let inner = sub(
            scale(w1, hadamard(b, cross(x, hadamard(ws, x)))),
            scale(a1, hadamard(w_inv, cross(y, hadamard(ws, y)))),
        );
        N4State {
            x: dx,
            y: hadamard(front, inner),
        }
    }

    /// Monitors `H`, `C1`, `C2`, `I`.
    pub fn system(&self) -> HamiltonianSystem {
        let s = self.bracket_matrix();
        let c1: Field = Arc::new(CasimirField::new(1, &s).expect("nonzero diagonal"));
        let c2: Field = Arc::new(CasimirField::new(2, &s).expect("nonzero diagonal"));
        HamiltonianSystem::new(s, Arc::new(self.hamiltonian_field()))
            .with_monitor("C1", c1)
            .with_monitor("C2", c2)
            .with_monitor("I", Arc::new(self.integral_field()))
    }

    /// The flow of `C_l^W` in the bracket `S`, monitoring `C1`, `C2` of `S`.
    pub fn second_casimir_flow(&self, l: usize) -> Result<HamiltonianSystem> {
        let s = self.bracket_matrix();
        let h: Field = Arc::new(CasimirField::new(l, &self.second_matrix())?);
        let c1: Field = Arc::new(CasimirField::new(1, &s)?);
        let c2: Field = Arc::new(CasimirField::new(2, &s)?);
        Ok(HamiltonianSystem::new(s, h).with_monitor("C1", c1).with_monitor("C2", c2))
    }

    /// Relative residual of the matrix form
    /// `dR/dt = a₁a₂a₃[W⁻¹SRW⁻¹S, R]_{S⁻¹}`, `R = ρ − δ⁻¹ρᵀδ`, at `ρ`.
    pub fn matrix_form_residual(&self, rho: &DualPoint) -> Result<f64> {
        let params = self.deformation();
        params.check_same(rho.params())?;
        let st = build_structure(&params);
        let d = st.delta_matrix();
        let d_inv = DMatrix::from_diagonal(&st.delta_inverse().expect("nonzero parameters"));
        let reflect = |m: &DMatrix<f64>| m - &d_inv * m.transpose() * &d;

        let z = N4State::from_dual(rho)?;
        let drho = self.rhs(&z).to_dual(&params)?;
        let lhs = reflect(drho.matrix());

        let r = reflect(rho.matrix());
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, self.s.iter().map(|v| 1.0 / v)));
        let s_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.s));
        let w_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.w));
        let ws = &w_inv * &s;
        let left = &ws * &r * &ws;
        let total = self.a.iter().product::<f64>();
        let rhs = (&left * &s_inv * &r - &r * &s_inv * &left) * total;
        let scale = lhs.amax().max(rhs.amax());
        let diff = (lhs - rhs).amax();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

fn c1_closed(a: [f64; 3], s: [f64; 4], z: &N4State) -> f64 {
    let [a1, a2, a3] = a;
    let [s1, s2, s3, s4] = s;
    let (x, y) = (z.x, z.y);
    -(s1 * s2 * a2 * a3 * x[0] * x[0]
        + s1 * s3 * a3 * x[1] * x[1]
        + s1 * s4 * x[2] * x[2]
        + s3 * s4 * a1 * a2 * y[0] * y[0]
        + s2 * s4 * a1 * y[1] * y[1]
        + s2 * s3 * a1 * a3 * y[2] * y[2])
        / (a1 * a2 * a3)
}

/// `½ Σ h_k z_k²` with `h` given in `(x, y)` order.
fn xy_diagonal_field(params: &DeformationParams, h: [f64; 6]) -> QuadraticField {
    let mut diag = [0.0; 6];
    for (k, (pos, _)) in XY_TO_DUAL.iter().enumerate() {
        diag[*pos] = h[k];
    }
    QuadraticField::diagonal(params, &diag).expect("six coordinates")
}

/// The contraction at `a₁ = 0` with `W = diag(0, 1/w₂, 1/w₃, 1/w₄)`; `w`
/// holds `w₂, w₃, w₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClebschParams {
    pub a: [f64; 3],
    pub s: [f64; 4],
    pub w: [f64; 3],
}

impl ClebschParams {
    pub fn new(a: [f64; 3], s: [f64; 4], w: [f64; 3]) -> Result<Self> {
        if a[0] != 0.0 {
            return Err(Error::Precondition(format!("the contraction needs a_1 = 0, got {}", a[0])));
        }
        check_nonzero("a", &a[1..])
            .map_err(|_| Error::InvalidParams("a_2 and a_3 must be finite and nonzero".into()))?;
        check_nonzero("s", &s)?;
        check_nonzero("w", &w)?;
        Ok(Self { a, s, w })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = [0.0, rng.gen_range(0.5..=1.5) * random_sign(rng), rng.gen_range(0.5..=1.5) * random_sign(rng)];
        let s = [(); 4].map(|_| rng.gen_range(0.5..=2.0));
        let w = [(); 3].map(|_| rng.gen_range(0.5..=2.0));
        Self { a, s, w }
    }

    pub fn deformation(&self) -> DeformationParams {
        DeformationParams::new(self.a.to_vec()).expect("three finite parameters")
    }

    pub fn bracket_matrix(&self) -> SymElement {
        SymElement::diagonal(&self.deformation(), &self.s.map(|v| 1.0 / v)).expect("diagonal of length 4")
    }

    fn h_coefficients(&self) -> [f64; 6] {
        let [_, a2, a3] = self.a;
        let [w2, w3, w4] = self.w;
        [w2 * a2 * a3, w3 * a3, w4, 0.0, 0.0, 0.0]
    }

    pub fn hamiltonian(&self, z: &N4State) -> f64 {
        let v = z.to_array();
        0.5 * self.h_coefficients().iter().zip(v).map(|(h, e)| h * e * e).sum::<f64>()
    }

    pub fn hamiltonian_field(&self) -> QuadraticField {
        xy_diagonal_field(&self.deformation(), self.h_coefficients())
    }

    pub fn rhs(&self, z: &N4State) -> N4State {
        let [a1, a2, a3] = self.a;
        let [s1, s2, s3, s4] = self.s;
        let [w2, w3, w4] = self.w;
        let delta_t = [a1, a1 * a2, a1 * a2 * a3];
        let w_inv = [w2, w3, w4];
        let ws = [w2 / s2, w3 / s3, w4 / s4];
        let b = [1.0, 1.0, a3];
        let (x, y) = (z.x, z.y);
        let dx = scale(-1.0 / s1, hadamard(delta_t, cross(hadamard(w_inv, x), hadamard(b, y))));
        // a₂a₃A⁻¹B⁻¹ B(x × W̃⁻¹S̃x); δ̃ vanishes with a₁ so x is frozen
        let dy = hadamard([a3, a2 * a3, a2 * a3], cross(x, hadamard(ws, x)));
        N4State { x: dx, y: dy }
    }

    /// Monitors `H` and the degenerate Casimir `C̃1`.
    pub fn system(&self) -> HamiltonianSystem {
        let s = self.bracket_matrix();
        let c: Field = Arc::new(DegenerateCasimirField::new(1, &s).expect("nonzero diagonal"));
        HamiltonianSystem::new(s, Arc::new(self.hamiltonian_field())).with_monitor("C~1", c)
    }
}

/// The vector form of the bracket for the coordinate functions
/// `(x₁, x₂, x₃, y₁, y₂, y₃)`:
///
/// `{f,g} = (Ax)·((S̃B f_x) × g_y − (S̃B g_x) × f_y) + a₁ s₁⁻¹ (Ay)·(f_x × g_x)
///  + (AS̃By)·(f_y × g_y)`,
///
/// with `A = diag(a₂,1,1)`, `B = diag(1,1,a₃)`, `S̃ = diag(s₂⁻¹,s₃⁻¹,s₄⁻¹)`.
/// `inv_s` holds `s_i⁻¹` so that `s₁⁻¹ = 0` can be represented.
pub fn vector_bracket_tensor(a: [f64; 3], inv_s: [f64; 4], z: &N4State) -> DMatrix<f64> {
    let [a1, a2, a3] = a;
    let am = [a2, 1.0, 1.0];
    let sb = [inv_s[1], inv_s[2], a3 * inv_s[3]];
    let ax = hadamard(am, z.x);
    let ay = hadamard(am, z.y);
    let asby = hadamard(sb, ay);
    let e = |i: usize| {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        v
    };
    let grad = |k: usize| if k < 3 { (e(k), [0.0; 3]) } else { ([0.0; 3], e(k - 3)) };
    DMatrix::from_fn(6, 6, |p, q| {
        let (fx, fy) = grad(p);
        let (gx, gy) = grad(q);
        dot(ax, sub(cross(hadamard(sb, fx), gy), cross(hadamard(sb, gx), fy)))
            + a1 * inv_s[0] * dot(ay, cross(fx, gx))
            + dot(asby, cross(fy, gy))
    })
}
