//! Lie-algebra isomorphisms between deformed algebras and `so_T(n)`, the
//! `so(p,q)` classification, and the semidirect splitting at a zero
//! parameter.
//!
//! Maps are stored as sums of terms `L X R` or `L Xᵀ R`, which keeps them
//! closed under composition.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{
    bracket_matrix, build_structure, diag_left, lower_pairs, max_abs,
    DeformationParams, SkewElement, SymElement,
};
use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, inertia, jacobi_eigen, singular_values, SINGULAR_RCOND};
use crate::sample;

/// Relative threshold below which an eigenvalue counts as zero when
/// classifying.
pub const INERTIA_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoKind {
    DeltaMap,
    Conjugation,
    A1ZeroMap,
    Composed,
}

/// Where a map lands: the deformed space itself or plain antisymmetric
/// matrices (`so_T(n)` for some bracket matrix `T`).
#[derive(Debug, Clone, PartialEq)]
pub enum Codomain {
    Deformed(DeformationParams),
    Antisymmetric(usize),
}

impl Codomain {
    /// How far `m` is from lying in the codomain.
    pub fn membership_residual(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            Codomain::Deformed(p) => crate::algebra::skew_residual(p, m),
            Codomain::Antisymmetric(_) => max_abs(&(m + m.transpose())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapTerm {
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    /// Whether the term acts on `Xᵀ` instead of `X`.
    pub transpose: bool,
}

impl MapTerm {
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        if self.transpose {
            &self.left * x.transpose() * &self.right
        } else {
            &self.left * x * &self.right
        }
    }

    /// `outer ∘ self`
    fn then(&self, outer: &MapTerm) -> MapTerm {
        if outer.transpose {
            // (L₁ X R₁)ᵀ = R₁ᵀ Xᵀ L₁ᵀ
            MapTerm {
                left: &outer.left * self.right.transpose(),
                right: self.left.transpose() * &outer.right,
                transpose: !self.transpose,
            }
        } else {
            MapTerm {
                left: &outer.left * &self.left,
                right: &self.right * &outer.right,
                transpose: self.transpose,
            }
        }
    }
}

/// A linear map between Lie algebras `(A, [·,·]_{S_src}) → (codomain, [·,·]_T)`.
#[derive(Debug, Clone)]
pub struct IsoMap {
    pub kind: IsoKind,
    pub source: DeformationParams,
    pub source_bracket: DMatrix<f64>,
    pub codomain: Codomain,
    pub target_bracket: DMatrix<f64>,
    pub terms: Vec<MapTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoCertificate {
    /// Smallest over largest singular value of the coordinate matrix.
    pub singular_ratio: f64,
    pub homomorphism_residual: f64,
    pub image_residual: f64,
    pub trials: usize,
}

impl IsoCertificate {
    pub fn injective(&self) -> bool {
        self.singular_ratio > SINGULAR_RCOND
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.injective() && self.homomorphism_residual < tol && self.image_residual < tol
    }
}

impl IsoMap {
    pub fn apply_matrix(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.source.n();
        let mut out = DMatrix::zeros(n, n);
        for t in &self.terms {
            out += t.apply(x);
        }
        out
    }

    pub fn apply(&self, x: &SkewElement) -> Result<DMatrix<f64>> {
        x.params().check_same(&self.source)?;
        Ok(self.apply_matrix(x.matrix()))
    }

    /// Columns are the strictly-lower coordinates of the images of the
    /// coordinate basis; both spaces are determined by those entries.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let basis = SkewElement::basis(&self.source);
        let n = self.source.n();
        let dim = basis.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (col, e) in basis.iter().enumerate() {
            let image = self.apply_matrix(e.matrix());
            for (row, (i, j)) in lower_pairs(n).enumerate() {
                out[(row, col)] = image[(i, j)];
            }
        }
        out
    }

    pub fn singular_ratio(&self) -> f64 {
        let sv = singular_values(&self.coordinate_matrix());
        match (sv.first(), sv.last()) {
            (Some(&max), Some(&min)) if max > 0.0 => min / max,
            _ => 0.0,
        }
    }

    /// `|f([X,Y]) - [fX, fY]|` relative to `|fX| |fY| |T|`.
    pub fn homomorphism_residual_for(&self, x: &SkewElement, y: &SkewElement) -> Result<f64> {
        let lhs = self.apply_matrix(&bracket_matrix(x.matrix(), y.matrix(), &self.source_bracket));
        let (fx, fy) = (self.apply(x)?, self.apply(y)?);
        let rhs = bracket_matrix(&fx, &fy, &self.target_bracket);
        let scale = max_abs(&fx) * max_abs(&fy) * max_abs(&self.target_bracket);
        let diff = max_abs(&(lhs - rhs));
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub fn certify<R: Rng + ?Sized>(&self, rng: &mut R, trials: usize) -> Result<IsoCertificate> {
        let mut hom: f64 = 0.0;
        let mut image: f64 = 0.0;
        for _ in 0..trials {
            let x = sample::skew(&self.source, rng);
            let y = sample::skew(&self.source, rng);
            hom = hom.max(self.homomorphism_residual_for(&x, &y)?);
            let fx = self.apply(&x)?;
            image = image.max(self.codomain.membership_residual(&fx) / max_abs(&fx).max(f64::MIN_POSITIVE));
        }
        Ok(IsoCertificate {
            singular_ratio: self.singular_ratio(),
            homomorphism_residual: hom,
            image_residual: image,
            trials,
        })
    }
}

fn diag(d: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(d)
}

/// `X ↦ δX` into `so_{Sδ⁻¹}(n)`.
pub fn iso_delta(params: &DeformationParams, s: &SymElement) -> Result<IsoMap> {
    params.check_same(s.params())?;
    params.require_nonzero()?;
    let st = build_structure(params);
    let n = params.n();
    let delta_inv = st.delta_inverse().expect("all parameters nonzero");
    Ok(IsoMap {
        kind: IsoKind::DeltaMap,
        source: params.clone(),
        source_bracket: s.matrix().clone(),
        codomain: Codomain::Antisymmetric(n),
        target_bracket: s.matrix() * diag(&delta_inv),
        terms: vec![MapTerm {
            left: diag(&st.delta),
            right: DMatrix::identity(n, n),
            transpose: false,
        }],
    })
}

/// `X ↦ Cδ̃XCᵀδ̃` from `(A, [·,·]_{Cᵀδ̃SCδ̃})` onto `(A, [·,·]_S)`.
///
/// With zero parameters `C` must be block-diagonal with respect to the
/// zero-set blocks; `δ̃ = δ` in the generic case.
pub fn iso_conjugation(params: &DeformationParams, s: &SymElement, c: &DMatrix<f64>) -> Result<IsoMap> {
    params.check_same(s.params())?;
    let n = params.n();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.nrows().max(c.ncols()),
        });
    }
    checked_inverse(c)?;
    let st = build_structure(params);
    let scale = max_abs(c);
    for b in &st.blocks {
        let p = diag(&b.proj);
        let q = DMatrix::identity(n, n) - &p;
        let leak = max_abs(&(&p * c * &q)).max(max_abs(&(&q * c * &p)));
        if leak > 1e-14 * scale {
            return Err(Error::Precondition(format!(
                "conjugating matrix is not block-diagonal at zero index {}",
                b.k
            )));
        }
    }
    let dt = diag(&st.delta_tilde());
    let cd = c * &dt;
    Ok(IsoMap {
        kind: IsoKind::Conjugation,
        source: params.clone(),
        source_bracket: c.transpose() * &dt * s.matrix() * &cd,
        codomain: Codomain::Deformed(params.clone()),
        target_bracket: s.matrix().clone(),
        terms: vec![MapTerm {
            left: cd,
            right: c.transpose() * &dt,
            transpose: false,
        }],
    })
}

/// `X ↦ ½(δ₁X - Xᵀδ₁)` into `so_{Sι(δ₁)}(n)` when only `a₁` vanishes.
///
/// No inverse is built; the certificate establishes injectivity.
pub fn iso_a1_zero(params: &DeformationParams, s: &SymElement) -> Result<IsoMap> {
    params.check_same(s.params())?;
    if params.zero_set() != [1] {
        return Err(Error::Precondition(
            "the first-zero map needs a_1 = 0 and every other parameter nonzero".into(),
        ));
    }
    let st = build_structure(params);
    let n = params.n();
    let block = &st.blocks[1];
    let half_delta = diag(&(&block.delta * 0.5));
    Ok(IsoMap {
        kind: IsoKind::A1ZeroMap,
        source: params.clone(),
        source_bracket: s.matrix().clone(),
        codomain: Codomain::Antisymmetric(n),
        target_bracket: s.matrix() * diag(&block.iota),
        terms: vec![
            MapTerm {
                left: half_delta.clone(),
                right: DMatrix::identity(n, n),
                transpose: false,
            },
            MapTerm {
                left: -DMatrix::identity(n, n),
                right: half_delta,
                transpose: true,
            },
        ],
    })
}

/// `second ∘ first`. The codomain of `first` must be the deformed space
/// `second` starts from, with matching bracket matrices.
pub fn compose(first: &IsoMap, second: &IsoMap) -> Result<IsoMap> {
    match &first.codomain {
        Codomain::Deformed(p) if p.same_as(&second.source) => {}
        _ => {
            return Err(Error::Precondition(
                "codomain of the first map is not the source of the second".into(),
            ))
        }
    }
    let scale = max_abs(&first.target_bracket).max(max_abs(&second.source_bracket));
    if max_abs(&(&first.target_bracket - &second.source_bracket)) > 1e-12 * scale {
        return Err(Error::Precondition("bracket matrices of the composed maps differ".into()));
    }
    let terms = first
        .terms
        .iter()
        .flat_map(|t1| second.terms.iter().map(move |t2| t1.then(t2)))
        .collect();
    Ok(IsoMap {
        kind: IsoKind::Composed,
        source: first.source.clone(),
        source_bracket: first.source_bracket.clone(),
        codomain: second.codomain.clone(),
        target_bracket: second.target_bracket.clone(),
        terms,
    })
}

/// Inertia of `Sδ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub eigenvalues: Vec<f64>,
}

impl Signature {
    pub fn label(&self) -> String {
        if self.q == 0 || self.p == 0 {
            format!("so({})", self.p + self.q)
        } else {
            format!("so({},{})", self.p.max(self.q), self.p.min(self.q))
        }
    }
}

/// `Sδ⁻¹`, checked for symmetry.
pub fn signature_matrix(params: &DeformationParams, s: &SymElement) -> Result<DMatrix<f64>> {
    params.check_same(s.params())?;
    params.require_nonzero()?;
    let st = build_structure(params);
    let t = s.matrix() * diag(&st.delta_inverse().expect("all parameters nonzero"));
    let asym = max_abs(&(&t - t.transpose()));
    if asym > 1e-12 * max_abs(&t) {
        return Err(Error::Precondition(format!("Sδ⁻¹ is not symmetric (residual {asym:e})")));
    }
    Ok(t)
}

pub fn classify_signature(params: &DeformationParams, s: &SymElement) -> Result<Signature> {
    let t = signature_matrix(params, s)?;
    checked_inverse(s.matrix())?;
    let eig = jacobi_eigen(&t);
    let (p, q) = inertia(&eig.values, INERTIA_REL_TOL)?;
    Ok(Signature {
        p,
        q,
        eigenvalues: eig.values,
    })
}

/// An explicit isomorphism `(A, [·,·]_S) ≅ so(p,q)`: a conjugation onto the
/// diagonal bracket `Jδ` followed by the δ-map into `so_J(n)`, `J = diag(±1)`.
#[derive(Debug, Clone)]
pub struct SoPqCertificate {
    pub signature: Signature,
    pub chain: IsoMap,
    pub j: DVector<f64>,
}

pub fn so_pq_certificate(params: &DeformationParams, s: &SymElement) -> Result<SoPqCertificate> {
    let signature = classify_signature(params, s)?;
    let t = signature_matrix(params, s)?;
    let eig = jacobi_eigen(&t);
    let st = build_structure(params);
    let delta_inv = st.delta_inverse().expect("all parameters nonzero");
    let j = DVector::from_iterator(eig.values.len(), eig.values.iter().map(|v| v.signum()));
    // Sδ⁻¹ = V Λ Vᵀ = Gᵀ J G with G = |Λ|^{1/2} Vᵀ; C = δ⁻¹G gives Cᵀδ(Jδ)Cδ = S.
    let root = DVector::from_iterator(eig.values.len(), eig.values.iter().map(|v| v.abs().sqrt()));
    let g = diag_left(&root, &eig.vectors.transpose());
    let c = diag_left(&delta_inv, &g);
    let j_delta = SymElement::diagonal(params, j.component_mul(&st.delta).as_slice())?;
    let conj = iso_conjugation(params, &j_delta, &c)?;
    let delta_map = iso_delta(params, &j_delta)?;
    let chain = compose(&conj, &delta_map)?;
    Ok(SoPqCertificate { signature, chain, j })
}

/// `X = [[A, 0], [B, C]]` split at a zero parameter `a_k = 0` (1-based `k`):
/// `A` is `k×k`, `C` is `(n-k)×(n-k)`, `B` is `(n-k)×k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidirectTriple {
    pub k: usize,
    pub a: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

fn require_zero(params: &DeformationParams, k: usize) -> Result<()> {
    if k == 0 || k >= params.n() || params.param(k) != 0.0 {
        return Err(Error::Precondition(format!("a_{k} must exist and vanish for a split")));
    }
    Ok(())
}

pub fn semidirect_split(params: &DeformationParams, x: &SkewElement, k: usize) -> Result<SemidirectTriple> {
    params.check_same(x.params())?;
    require_zero(params, k)?;
    let n = params.n();
    let m = x.matrix();
    Ok(SemidirectTriple {
        k,
        a: m.view((0, 0), (k, k)).into_owned(),
        c: m.view((k, k), (n - k, n - k)).into_owned(),
        b: m.view((k, 0), (n - k, k)).into_owned(),
    })
}

pub fn semidirect_join(params: &DeformationParams, t: &SemidirectTriple) -> Result<SkewElement> {
    require_zero(params, t.k)?;
    let (n, k) = (params.n(), t.k);
    if t.a.shape() != (k, k) || t.c.shape() != (n - k, n - k) || t.b.shape() != (n - k, k) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.a.nrows() + t.c.nrows(),
        });
    }
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (k, k)).copy_from(&t.a);
    m.view_mut((k, k), (n - k, n - k)).copy_from(&t.c);
    m.view_mut((k, 0), (n - k, k)).copy_from(&t.b);
    SkewElement::from_matrix(params, m, crate::algebra::DEFAULT_TOL)
}

/// `([A,A'], [C,C'], BA' + CB' - B'A - C'B)`: the semidirect-product bracket
/// with the action `(A,C)·B = CB - BA`.
pub fn triple_bracket(x: &SemidirectTriple, y: &SemidirectTriple) -> Result<SemidirectTriple> {
    if x.k != y.k || x.a.shape() != y.a.shape() || x.c.shape() != y.c.shape() {
        return Err(Error::Precondition("triples split at different places".into()));
    }
    let comm = |p: &DMatrix<f64>, q: &DMatrix<f64>| p * q - q * p;
    Ok(SemidirectTriple {
        k: x.k,
        a: comm(&x.a, &y.a),
        c: comm(&x.c, &y.c),
        b: &x.b * &y.a + &x.c * &y.b - &y.b * &x.a - &y.c * &x.b,
    })
}

/// One level of the splitting: the block `lo..hi` is cut at `k` into
/// `lo..k` and `k..hi` with an abelian ideal of dimension
/// `(hi-k)(k-lo)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitLevel {
    pub k: usize,
    pub left_dim: usize,
    pub right_dim: usize,
    pub abelian_dim: usize,
}

/// Splits repeatedly at every zero parameter, always cutting the
/// remaining right-hand block.
pub fn nested_decomposition(params: &DeformationParams) -> Vec<SplitLevel> {
    let n = params.n();
    let mut lo = 0;
    params
        .zero_set()
        .iter()
        .map(|&k| {
            let level = SplitLevel {
                k,
                left_dim: k - lo,
                right_dim: n - k,
                abelian_dim: (n - k) * (k - lo),
            };
            lo = k;
            level
        })
        .collect()
}
