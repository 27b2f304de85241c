//! Property tests for the symmetric-function layer against brute-force
//! subset oracles, plus frozen values for a few hand-checked inputs.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use newtonlk::symfun::{
    binomial, characteristic_polynomial, elementary_symmetric, eval_polynomial, mean_curvatures,
    newton_eigenvalues, newton_matrix, newton_matrix_sum, newton_trace_coefficient,
    scalar_curvature_check, trace_identities, PrincipalCurvatures, ShapeMatrix,
};
use newtonlk::util;

fn curvature_vec() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=6).prop_flat_map(|n| proptest::collection::vec(-3.0..3.0f64, n))
}

fn symmetric_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=6).prop_flat_map(|n| {
        proptest::collection::vec(-1.0..1.0f64, n * n).prop_map(move |entries| {
            let raw = DMatrix::from_vec(n, n, entries);
            0.5 * (&raw + raw.transpose())
        })
    })
}

fn scale(values: &[f64], degree: usize) -> f64 {
    util::degree_scale(util::max_abs(values), degree)
}

proptest! {
    #[test]
    fn sigma_matches_subset_oracle(values in curvature_vec()) {
        let sigma = elementary_symmetric(&values);
        prop_assert_eq!(sigma.len(), values.len() + 1);
        for (k, &s) in sigma.iter().enumerate() {
            let oracle = common::sigma_subsets(&values, k);
            prop_assert!((s - oracle).abs() <= 1e-12 * scale(&values, k),
                "sigma_{} = {} vs oracle {}", k, s, oracle);
        }
    }

    #[test]
    fn mean_curvatures_are_normalized_sigma(values in curvature_vec()) {
        let n = values.len();
        let h = mean_curvatures(&values);
        for (k, &hk) in h.iter().enumerate() {
            let oracle = common::sigma_subsets(&values, k) / binomial(n, k);
            prop_assert!((hk - oracle).abs() <= 1e-12 * scale(&values, k));
        }
    }

    #[test]
    fn newton_eigenvalues_match_mu_oracle(values in curvature_vec()) {
        let n = values.len();
        let curv = PrincipalCurvatures::new(values).unwrap();
        for k in 0..=n {
            let mu = newton_eigenvalues(&curv, k).unwrap();
            for i in 0..n {
                let oracle = common::mu_subsets(curv.values(), i, k);
                prop_assert!((mu[i] - oracle).abs() <= 1e-12 * scale(curv.values(), k),
                    "mu_({},{}) = {} vs oracle {}", i, k, mu[i], oracle);
            }
        }
    }

    #[test]
    fn sigma_is_permutation_invariant(values in curvature_vec()) {
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted.reverse();
        let lhs = elementary_symmetric(&values);
        let rhs = elementary_symmetric(&sorted);
        for (k, (&a, &b)) in lhs.iter().zip(rhs.iter()).enumerate() {
            prop_assert!((a - b).abs() <= 1e-12 * scale(&values, k));
        }
    }

    #[test]
    fn sigma_parity_under_negation(values in curvature_vec()) {
        let negated: Vec<f64> = values.iter().map(|v| -v).collect();
        let lhs = elementary_symmetric(&values);
        let rhs = elementary_symmetric(&negated);
        for k in 0..lhs.len() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((rhs[k] - sign * lhs[k]).abs() <= 1e-12 * scale(&values, k));
        }
    }

    #[test]
    fn recursion_and_sum_routes_agree(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let n = shape.dim();
        let snorm = util::max_abs(shape.curvatures().values());
        for k in 0..=n {
            let rec = newton_matrix(&shape, k).unwrap();
            let sum = newton_matrix_sum(&shape, k).unwrap();
            let diff = util::amax(&(&rec - &sum));
            prop_assert!(diff <= 1e-12 * util::degree_scale(snorm, k));
        }
    }

    #[test]
    fn newton_matrices_commute_with_shape(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let snorm = util::max_abs(shape.curvatures().values());
        for k in 0..=shape.dim() {
            let p = newton_matrix(&shape, k).unwrap();
            let comm = shape.matrix() * &p - &p * shape.matrix();
            prop_assert!(util::amax(&comm) <= 1e-12 * util::degree_scale(snorm, k + 1));
        }
    }

    #[test]
    fn top_newton_matrix_vanishes(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let snorm = util::max_abs(shape.curvatures().values());
        let top = newton_matrix(&shape, shape.dim()).unwrap();
        prop_assert!(util::amax(&top) <= 1e-10 * util::degree_scale(snorm, shape.dim()));
    }

    #[test]
    fn traces_match_subset_oracle(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let n = shape.dim();
        let curv = shape.curvatures();
        let kappa = curv.values();
        let snorm = util::max_abs(kappa);
        for k in 0..=n {
            let id = trace_identities(&shape, k).unwrap();
            let s_k = common::sigma_subsets(kappa, k);
            let s_k1 = common::sigma_subsets(kappa, k + 1);
            let s_k2 = common::sigma_subsets(kappa, k + 2);
            let s_1 = common::sigma_subsets(kappa, 1);
            prop_assert!((id.trace_pk - (n - k) as f64 * s_k).abs()
                <= 1e-11 * util::degree_scale(snorm, k));
            prop_assert!((id.trace_s_pk - (k + 1) as f64 * s_k1).abs()
                <= 1e-11 * util::degree_scale(snorm, k + 1));
            prop_assert!((id.trace_s2_pk - (s_1 * s_k1 - (k + 2) as f64 * s_k2)).abs()
                <= 1e-11 * util::degree_scale(snorm, k + 2));
        }
    }

    #[test]
    fn characteristic_polynomial_kills_curvatures(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let n = shape.dim();
        let snorm = util::max_abs(shape.curvatures().values());
        let coeffs = characteristic_polynomial(&shape);
        prop_assert_eq!(coeffs.len(), n + 1);
        for &kappa in shape.curvatures().values() {
            let val = eval_polynomial(&coeffs, kappa);
            prop_assert!(val.abs() <= 1e-10 * util::degree_scale(snorm, n));
        }
    }

    #[test]
    fn scalar_identity_holds_for_both_signs(m in symmetric_matrix()) {
        let shape = ShapeMatrix::new(m).unwrap();
        let snorm = util::max_abs(shape.curvatures().values());
        for c in [1.0, -1.0] {
            let res = scalar_curvature_check(&shape, c);
            prop_assert!(res.abs() <= 1e-12 * util::degree_scale(snorm, 2).max(1.0));
        }
    }
}

#[test]
fn trace_coefficient_has_both_closed_forms() {
    for n in 1..=12usize {
        for k in 0..n {
            let c_k = newton_trace_coefficient(n, k);
            assert_eq!(c_k, (n - k) as f64 * binomial(n, k));
            assert_eq!(c_k, (k + 1) as f64 * binomial(n, k + 1));
        }
    }
}

#[test]
fn frozen_values_for_one_two_three_four() {
    // sigma(1,2,3,4) = (1, 10, 35, 50, 24), checked by hand.
    let sigma = elementary_symmetric(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(sigma, vec![1.0, 10.0, 35.0, 50.0, 24.0]);

    let h = mean_curvatures(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(h, vec![1.0, 2.5, 35.0 / 6.0, 12.5, 24.0]);

    // mu_{1,k}: sigma of (2,3,4) = (1, 9, 26, 24).
    let curv = PrincipalCurvatures::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    for (k, expected) in [(0usize, 1.0), (1, 9.0), (2, 26.0), (3, 24.0)] {
        let mu = newton_eigenvalues(&curv, k).unwrap();
        assert_eq!(mu[0], expected, "mu_(0,{k}) for sorted (1,2,3,4)");
    }
}

#[test]
fn frozen_newton_matrix_for_diag_123() {
    // P_2 = s_2 I - S P_1 = diag(6, 3, 2) for S = diag(1,2,3).
    let shape = ShapeMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
    let p2 = newton_matrix(&shape, 2).unwrap();
    let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![6.0, 3.0, 2.0]));
    assert_eq!(p2, expected);
}
