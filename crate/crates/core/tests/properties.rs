mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsionlab_core::hermitian::{
    bottom_left_block, exterior_coefficient, exterior_coefficient_slow, iota_embed, ExteriorMarking,
};
use torsionlab_core::homology::{cokernel, growth_scan, smith_normal_form};
use torsionlab_core::mahler::{kronecker_zero_test, mahler_measure};
use torsionlab_core::ring::root_of_unity;
use torsionlab_core::{cyclotomic, LaurentPoly, Mat};

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-6i64..=6, -5i64..=5), 0..6).prop_map(|terms| {
        LaurentPoly::from_terms(terms.into_iter().map(|(k, c)| (k, BigInt::from(c))))
    })
}

fn nonzero_poly() -> impl Strategy<Value = LaurentPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn int_mat(max: usize) -> impl Strategy<Value = Mat<BigInt>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-9i64..=9, r * c)
            .prop_map(move |v| Mat::from_vec(r, c, v.into_iter().map(BigInt::from).collect()))
    })
}

proptest! {
    #[test]
    fn laurent_ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert!((&a + &(-&a)).is_zero());
        prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
    }

    #[test]
    fn involution_is_ring_automorphism(a in poly(), b in poly()) {
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        prop_assert_eq!(a.conj().augmentation(), a.augmentation());
    }

    #[test]
    fn reduction_is_ring_morphism(a in poly(), b in poly(), q in 1usize..12) {
        let ra = a.reduce_mod_q(q).unwrap();
        let rb = b.reduce_mod_q(q).unwrap();
        prop_assert_eq!((&a * &b).reduce_mod_q(q).unwrap(), &ra * &rb);
        prop_assert_eq!((&a + &b).reduce_mod_q(q).unwrap(), &ra + &rb);
        prop_assert_eq!(a.conj().reduce_mod_q(q).unwrap(), ra.conj());
        prop_assert_eq!(ra.augmentation(), a.augmentation());
    }

    #[test]
    fn circulant_is_ring_morphism(a in poly(), b in poly(), q in 1usize..9) {
        let ra = a.reduce_mod_q(q).unwrap();
        let rb = b.reduce_mod_q(q).unwrap();
        prop_assert_eq!((&ra * &rb).circulant_expand(), ra.circulant_expand().mul(&rb.circulant_expand()));
        prop_assert_eq!(ra.conj().circulant_expand(), ra.circulant_expand().transpose());
    }

    #[test]
    fn iota_is_evaluation(a in poly(), b in poly(), q in 3usize..12, j in 1i64..12) {
        prop_assume!(num_integer::gcd(j, q as i64) == 1);
        let ra = a.reduce_mod_q(q).unwrap();
        let rb = b.reduce_mod_q(q).unwrap();
        let z = root_of_unity(q, j);
        let tol = 1e-9 * (1.0 + a.eval_unchecked(z).norm() * b.eval_unchecked(z).norm());
        prop_assert!(((&ra * &rb).iota(j) - ra.iota(j) * rb.iota(j)).norm() < tol);
        prop_assert!((ra.iota(j) - a.eval_unchecked(z)).norm() < 1e-9 * (1.0 + a.height().to_string().len() as f64));
        prop_assert!((ra.conj().iota(j) - ra.iota(j).conj()).norm() < 1e-9);
    }

    #[test]
    fn exact_division_inverts_product(a in nonzero_poly(), b in nonzero_poly()) {
        prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mahler_multiplicative(a in nonzero_poly(), b in nonzero_poly()) {
        let ma = mahler_measure(&a, 1e-12).unwrap().log_measure;
        let mb = mahler_measure(&b, 1e-12).unwrap().log_measure;
        let mab = mahler_measure(&(&a * &b), 1e-12).unwrap().log_measure;
        prop_assert!((mab - ma - mb).abs() < 1e-8, "{} vs {}", mab, ma + mb);
    }

    #[test]
    fn mahler_unit_invariant(a in nonzero_poly(), k in -5i64..5) {
        let m = mahler_measure(&a, 1e-12).unwrap().log_measure;
        let mk = mahler_measure(&a.shift(k), 1e-12).unwrap().log_measure;
        let mc = mahler_measure(&a.conj(), 1e-12).unwrap().log_measure;
        prop_assert_eq!(m.to_bits(), mk.to_bits());
        prop_assert!((m - mc).abs() < 1e-9);
        prop_assert!(m >= -1e-12);
    }

    #[test]
    fn cyclotomic_products_have_zero_measure(
        idx in prop::collection::vec(1u64..40, 1..4),
        k in -4i64..4,
        neg in any::<bool>(),
    ) {
        let mut p = LaurentPoly::monomial(if neg { -1 } else { 1 }, k);
        for &n in &idx {
            p = &p * &cyclotomic(n);
        }
        let f = kronecker_zero_test(&p).unwrap().expect("cyclotomic product");
        prop_assert_eq!(f.expand(), p.clone());
        prop_assert_eq!(mahler_measure(&p, 1e-12).unwrap().log_measure, 0.0);
    }

    #[test]
    fn smith_form_is_valid(a in int_mat(5)) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert!(num_traits::Signed::abs(&s.u.det()) == BigInt::from(1));
        prop_assert!(num_traits::Signed::abs(&s.v.det()) == BigInt::from(1));
        let d = s.invariant_factors();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert!(s.d[(i, j)] == BigInt::from(0));
                }
            }
        }
        for w in d.windows(2) {
            prop_assert!(w[0] >= BigInt::from(0));
            if w[0] == BigInt::from(0) {
                prop_assert!(w[1] == BigInt::from(0));
            } else {
                prop_assert!((&w[1] % &w[0]) == BigInt::from(0));
            }
        }
        let c = cokernel(&a);
        prop_assert_eq!(c.torsion, s.torsion());
        prop_assert_eq!(c.betti, s.corank());
    }

    #[test]
    fn words_preserve_form(seed in any::<u64>(), g in 3usize..5, len in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_word(&mut rng, g, len);
        prop_assert!(w.check_form_preserved());
        prop_assert!(w.unit_twist(3).check_form_preserved());
        let wq = w.reduce_mod_q(5).unwrap();
        prop_assert!(wq.check_form_preserved());
    }

    #[test]
    fn exterior_coefficient_is_block_determinant(seed in any::<u64>(), q in prop::sample::select(vec![3usize, 5, 7])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_word(&mut rng, 3, 4);
        let wq = w.reduce_mod_q(q).unwrap();
        let a = iota_embed(&wq, 1).unwrap();
        let marking = ExteriorMarking::new(w.model());
        let lhs = exterior_coefficient(&a, &marking).norm();
        let rhs = bottom_left_block(&wq).det().iota(1).norm();
        let slow = exterior_coefficient_slow(&a, &marking).norm();
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs));
        prop_assert!((lhs - slow).abs() < 1e-8 * (1.0 + rhs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn growth_scan_unit_invariant(a in nonzero_poly(), k in -3i64..3) {
        let m = Mat::from_rows(vec![vec![a.clone()]]);
        let mk = Mat::from_rows(vec![vec![a.shift(k)]]);
        let qs = [3usize, 5, 8];
        let s = growth_scan(&m, &qs).unwrap();
        let sk = growth_scan(&mk, &qs).unwrap();
        prop_assert_eq!(&s.reports, &sk.reports);
        prop_assert_eq!(s.mahler.map(|m| m.log_measure.to_bits()), sk.mahler.map(|m| m.log_measure.to_bits()));
    }
}
