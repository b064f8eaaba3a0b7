//! Invariants of matrices, weights, and consistency on random inputs.

#![allow(clippy::needless_range_loop)]

mod common;

use ahp_eval::consistency::check;
use ahp_eval::judgment::Rational;
use ahp_eval::matrix::{build_matrix, default_labels, PairwiseMatrix};
use ahp_eval::weights::{derive_weights, perron, WeightMethod};
use proptest::prelude::*;

fn random_matrix(orders: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PairwiseMatrix> {
    orders.prop_flat_map(|n| {
        prop::collection::vec(0usize..17, n * (n - 1) / 2)
            .prop_map(move |idx| build_matrix(n, &common::saaty_from_indices(n, &idx)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reciprocity_diagonal_and_normalization(m in random_matrix(2..=10)) {
        let n = m.order();
        for i in 0..n {
            prop_assert!(m.entry(i, i).is_one());
            for j in 0..n {
                prop_assert_eq!(m.entry(i, j), m.entry(j, i).recip());
            }
        }
        for method in [WeightMethod::PrincipalEigenvector, WeightMethod::GeometricMeanRows] {
            let w = derive_weights(&m, method).unwrap();
            prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(w.weights.iter().all(|&x| x > 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn consistent_matrices_recover_priorities(v in prop::collection::vec(1u64..1000, 2..=10)) {
        let n = v.len();
        let m = PairwiseMatrix::from_priorities(default_labels(n), &v).unwrap();
        let r = check(&m).unwrap();
        prop_assert!(r.coi.abs() <= 1e-9, "coi {}", r.coi);
        prop_assert!((r.lambda_max - n as f64).abs() <= 1e-8);
        let total: u64 = v.iter().sum();
        let ev = derive_weights(&m, WeightMethod::PrincipalEigenvector).unwrap();
        let gm = derive_weights(&m, WeightMethod::GeometricMeanRows).unwrap();
        for i in 0..n {
            let expect = v[i] as f64 / total as f64;
            prop_assert!((ev.weights[i] - expect).abs() <= 1e-9);
            prop_assert!((ev.weights[i] - gm.weights[i]).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn permutation_equivariance(
        (m, perm) in random_matrix(3..=10).prop_flat_map(|m| {
            let n = m.order();
            (Just(m), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let p = m.permuted(&perm).unwrap();
        let (a, b) = (check(&m).unwrap(), check(&p).unwrap());
        prop_assert!((a.lambda_max - b.lambda_max).abs() <= 1e-9);
        prop_assert!((a.coi - b.coi).abs() <= 1e-9);
        prop_assert!((a.cor.unwrap() - b.cor.unwrap()).abs() <= 1e-9);
        let wa = derive_weights(&m, WeightMethod::PrincipalEigenvector).unwrap();
        let wb = derive_weights(&p, WeightMethod::PrincipalEigenvector).unwrap();
        for k in 0..m.order() {
            prop_assert!((wb.weights[k] - wa.weights[perm[k]]).abs() <= 1e-9);
            prop_assert_eq!(&wb.labels[k], &wa.labels[perm[k]]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigenvalue_matches_characteristic_polynomial(m in random_matrix(2..=4)) {
        let power = perron(&m).unwrap().lambda_max;
        let oracle = common::char_poly_lambda(&common::dense(&m));
        prop_assert!((power - oracle).abs() <= 1e-7, "power {power} oracle {oracle}");
    }

    #[test]
    fn eigenvector_matches_matrix_squaring(m in random_matrix(2..=10)) {
        let a = common::dense(&m);
        let oracle = common::squaring_weights(&a);
        let sol = perron(&m).unwrap();
        for (x, y) in sol.vector.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        prop_assert!((sol.lambda_max - common::eigenvalue_for(&a, &oracle)).abs() <= 1e-8);
    }

    #[test]
    fn consistency_ratio_never_negative(m in random_matrix(3..=10)) {
        let r = check(&m).unwrap();
        prop_assert!(r.lambda_max >= m.order() as f64 - 1e-9);
        prop_assert!(r.coi >= -1e-9);
        prop_assert_eq!(r.worst_judgments.len(), m.order() * (m.order() - 1) / 2);
        prop_assert!(r.worst_judgments.windows(2).all(|w| w[0].deviation >= w[1].deviation));
    }
}

#[test]
fn oracle_self_check_on_known_matrix() {
    // [[1,2],[1/2,1]] is consistent: λ = 2.
    let m = build_matrix(2, &[((0, 1), "2".parse().unwrap())]).unwrap();
    assert!((common::char_poly_lambda(&common::dense(&m)) - 2.0).abs() < 1e-9);
    // char poly of [[1,2],[3,4]] is λ² − 5λ − 2
    let c = common::char_poly(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
    assert_eq!(c, vec![1.0, -5.0, -2.0]);
}

#[test]
fn non_scale_ratios_are_accepted_by_from_ratios() {
    let m = PairwiseMatrix::from_ratios(default_labels(2), &[((0, 1), Rational::new(10, 3).unwrap())]).unwrap();
    assert!(!m.is_elicited());
    assert!(m.judgments().is_none());
}
