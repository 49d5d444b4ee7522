use opfold_core::bispec::{
    min_order_check, reference_operator, verify_eigen, EigenvalueLadder, RightDifferentialOperator,
};
use opfold_core::exact::rational::{int, rat};
use opfold_core::matfold::{build_matrix_sequence, MatrixPolySequence};
use opfold_core::measures::{hermite_moments, laguerre_moments, sobolev_form, SobolevSpec};
use opfold_core::orthopoly::monic_sequence;
use proptest::prelude::*;

fn folded_paper_sequence() -> MatrixPolySequence {
    let form = sobolev_form(&SobolevSpec::top_derivative(laguerre_moments(0, 48), int(0), 1, int(1)).unwrap());
    build_matrix_sequence(&monic_sequence(&form, 17).unwrap(), &int(0), 1).unwrap()
}

#[test]
fn every_single_coefficient_perturbation_is_detected() {
    let r = folded_paper_sequence();
    let (op, ladder) = reference_operator();
    for k in 0..=8 {
        for i in 0..2 {
            for j in 0..2 {
                for power in 0..=6 {
                    let bad = op.perturbed(k, i, j, power, &int(1));
                    let report = verify_eigen(&r, &bad, &ladder, 0..=8).unwrap();
                    assert!(!report.passes(), "D_{k} ({i},{j}) y^{power} went unnoticed");
                }
            }
        }
    }
}

#[test]
fn ladder_fault_is_localized() {
    let r = folded_paper_sequence();
    let (op, ladder) = reference_operator();
    let report = verify_eigen(&r, &op, &ladder.perturbed(3, 1, &int(1)), 0..=8).unwrap();
    assert_eq!(report.failing(), vec![3]);
    let zero = verify_eigen(
        &r,
        &RightDifferentialOperator::zero(2),
        &EigenvalueLadder::zero(2),
        0..=8,
    )
    .unwrap();
    assert!(zero.passes());
}

#[test]
fn folded_hermite_minimal_order() {
    let seq = monic_sequence(&hermite_moments(40), 17).unwrap();
    let r = build_matrix_sequence(&seq, &int(0), 1).unwrap();
    let report = min_order_check(&r, 4, 8, None).unwrap();
    assert_eq!(report.minimal_order, Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_perturbations_are_detected(
        k in 0usize..9, i in 0usize..2, j in 0usize..2, power in 0usize..8,
        num in 1i64..50, den in 1i64..9, negative in any::<bool>(),
    ) {
        let r = folded_paper_sequence();
        let (op, ladder) = reference_operator();
        let delta = rat(if negative { -num } else { num }, den);
        let report = verify_eigen(&r, &op.perturbed(k, i, j, power, &delta), &ladder, 0..=8).unwrap();
        prop_assert!(!report.passes());
    }
}
