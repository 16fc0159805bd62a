use liebundle::algebra::{
    bracket, build_structure, is_member_skew, is_member_skew_projector, is_member_sym,
    is_member_sym_projector, max_abs, skew_residual, pi_project, trace_pair, DeformationParams, SkewElement,
    SymElement,
};
use liebundle::sample;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Parameter vectors of length 1..=5; roughly one entry in four is zero.
fn params() -> impl Strategy<Value = DeformationParams> {
    prop::collection::vec(
        prop_oneof![
            1 => Just(0.0),
            3 => (0.3f64..2.0, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v }),
        ],
        1..=5,
    )
    .prop_map(|a| DeformationParams::new(a).unwrap())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn jacobi_identity(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = sample::sym(&p, &mut r);
        let [x, y, z] = [(); 3].map(|_| sample::skew(&p, &mut r));
        let b = |u: &SkewElement, v: &SkewElement| bracket(u, v, &s).unwrap();
        let sum = b(&b(&x, &y), &z).matrix() + b(&b(&y, &z), &x).matrix() + b(&b(&z, &x), &y).matrix();
        let scale = (x.max_abs().max(y.max_abs()).max(z.max_abs()) * s.max_abs().max(1.0)).powi(3);
        prop_assert!(max_abs(&sum) < 1e-10 * scale.max(1.0));
    }

    #[test]
    fn bracket_closes(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = sample::sym(&p, &mut r);
        let (x, y) = (sample::skew(&p, &mut r), sample::skew(&p, &mut r));
        let z = bracket(&x, &y, &s).unwrap();
        // relative to the size of the inputs: for n = 2 the bracket is pure roundoff
        let scale = x.max_abs() * y.max_abs() * s.max_abs();
        prop_assert!(skew_residual(&p, z.matrix()) <= 1e-12 * scale);
        if z.max_abs() > 1e-8 * scale {
            prop_assert!(is_member_skew(&p, z.matrix(), 1e-12));
            prop_assert!(is_member_skew_projector(&p, z.matrix(), 1e-12));
        }
    }

    #[test]
    fn membership_forms_agree(p in params(), seed in any::<u64>(), member in any::<bool>()) {
        let mut r = rng(seed);
        let n = p.n();
        let (skew, sym) = if member {
            (sample::skew(&p, &mut r).into_matrix(), sample::sym(&p, &mut r).into_matrix())
        } else {
            (sample::matrix(n, &mut r), sample::matrix(n, &mut r))
        };
        prop_assert_eq!(is_member_skew(&p, &skew, 1e-12), is_member_skew_projector(&p, &skew, 1e-12));
        prop_assert_eq!(is_member_sym(&p, &sym, 1e-12), is_member_sym_projector(&p, &sym, 1e-12));
    }

    #[test]
    fn bracket_is_linear_in_s(p in params(), seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut r = rng(seed);
        let (s, t) = (sample::sym(&p, &mut r), sample::sym(&p, &mut r));
        let (x, y) = (sample::skew(&p, &mut r), sample::skew(&p, &mut r));
        let comb = SymElement::from_matrix(&p, s.matrix() * a + t.matrix() * b, 1e-12).unwrap();
        let lhs = bracket(&x, &y, &comb).unwrap();
        let rhs = bracket(&x, &y, &s).unwrap().matrix() * a + bracket(&x, &y, &t).unwrap().matrix() * b;
        prop_assert!(max_abs(&(lhs.matrix() - rhs)) < 1e-12 * (1.0 + max_abs(lhs.matrix())) * 8.0);
    }

    #[test]
    fn zero_blocks_are_lower_block_triangular(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let st = build_structure(&p);
        let x = sample::skew(&p, &mut r);
        let s = sample::sym(&p, &mut r);
        let n = p.n();
        for b in &st.blocks {
            let proj = DMatrix::from_diagonal(&b.proj);
            let comp = DMatrix::identity(n, n) - &proj;
            prop_assert_eq!(max_abs(&(&comp * x.matrix() * &proj)), 0.0);
            prop_assert_eq!(max_abs(&(&comp * s.matrix() * &proj)), 0.0);
        }
    }

    #[test]
    fn projection_is_dual_to_pairing(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = sample::matrix(p.n(), &mut r);
        let rho = pi_project(&p, &m).unwrap();
        for y in SkewElement::basis(&p) {
            let direct = (&m * y.matrix()).trace();
            prop_assert!((trace_pair(&rho, &y) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn coordinates_round_trip(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = sample::skew(&p, &mut r);
        let back = SkewElement::from_coords(&p, &x.coords()).unwrap();
        prop_assert_eq!(back.matrix(), x.matrix());
        let s = sample::sym(&p, &mut r);
        let back = SymElement::from_coords(&p, &s.coords()).unwrap();
        prop_assert_eq!(back.matrix(), s.matrix());
    }

    #[test]
    fn structure_windows_partition_identity(p in params()) {
        let st = build_structure(&p);
        let n = p.n();
        for (i, b) in st.blocks.iter().enumerate() {
            let prod = b.iota.component_mul(&b.delta);
            let next_proj = st.blocks.get(i + 1).map(|c| c.proj.clone()).unwrap_or_else(|| nalgebra::DVector::zeros(n));
            // 1/d * d is within an ulp of 1
            let gap = (prod - (&b.proj - next_proj)).amax();
            prop_assert!(gap <= f64::EPSILON, "{}", gap);
            for c in &st.blocks[i + 1..] {
                prop_assert!(b.delta.component_mul(&c.delta).iter().all(|v| *v == 0.0));
                prop_assert!(b.delta.component_mul(&c.proj).iter().all(|v| *v == 0.0));
            }
        }
    }
}

#[test]
fn standard_parameters_give_the_commutator() {
    let p = DeformationParams::standard(4).unwrap();
    let s = SymElement::identity(&p);
    let mut r = rng(5);
    let (x, y) = (sample::skew(&p, &mut r), sample::skew(&p, &mut r));
    let z = bracket(&x, &y, &s).unwrap();
    let comm = x.matrix() * y.matrix() - y.matrix() * x.matrix();
    assert!(max_abs(&(z.matrix() - comm)) < 1e-15);
}
