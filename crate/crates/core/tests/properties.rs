use axmat::formula::Formula;
use axmat::matrix::{apply_permutation, canonical_form, eval, is_normal, validates};
use axmat::search::{eval_partial, PartialValue};
use axmat_testkit::{
    atomic_modus_ponens_closed, check_formula_round_trip, check_matrix_round_trip,
    check_permutation_invariance, check_prune_soundness, formula, matrix, normalised, partial_case,
    partial_of, permutation_for, small_implication_matrices,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn formula_text_round_trips(f in formula(true)) {
        check_formula_round_trip(&f)?;
    }

    #[test]
    fn matrix_text_round_trips(m in matrix(5)) {
        check_matrix_round_trip(&m)?;
    }

    #[test]
    fn verdicts_survive_designation_preserving_permutations(
        m in matrix(5),
        f in formula(true),
        pick in any::<usize>(),
    ) {
        check_permutation_invariance(&m, &f, pick)?;
    }

    #[test]
    fn canonical_form_is_an_orbit_invariant(m in matrix(4), pick in any::<usize>()) {
        let c = canonical_form(&m);
        prop_assert_eq!(canonical_form(&c), c.clone());
        let image = apply_permutation(&m, &permutation_for(&m, pick)).unwrap();
        prop_assert_eq!(canonical_form(&image), c.clone());
        prop_assert!(c.flatten() <= m.flatten());
    }

    #[test]
    fn modus_ponens_preserves_validity_in_normal_matrices(
        m in matrix(4).prop_map(normalised),
        a in formula(false),
        b in formula(false),
    ) {
        prop_assert!(is_normal(&m));
        let ab = Formula::imp(a.clone(), b.clone());
        if validates(&m, &a).unwrap().is_valid() && validates(&m, &ab).unwrap().is_valid() {
            prop_assert!(validates(&m, &b).unwrap().is_valid());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn contradictions_have_no_passing_completion(case in partial_case(20)) {
        check_prune_soundness(&case)?;
    }

    #[test]
    fn partial_evaluation_agrees_with_completions(
        (m, pm, completions) in matrix(4).prop_flat_map(|m| partial_of(m, 5)),
        f in formula(true),
        values in prop::collection::vec(0u8..4, 4),
    ) {
        let f = if m.signature().is_superset_of(f.signature()) { f } else { Formula::var("p") };
        let n = m.size() as u8;
        let a = f
            .variables()
            .into_iter()
            .zip(values)
            .map(|(v, x)| (v, x % n))
            .collect();
        match eval_partial(&pm, &f, &a).unwrap() {
            PartialValue::Known(v) => {
                prop_assert_eq!(eval(&m, &f, &a).unwrap(), v);
                for other in &completions {
                    prop_assert_eq!(eval(other, &f, &a).unwrap(), v);
                }
            }
            PartialValue::Unknown(cell) => prop_assert_eq!(pm.get(cell), None),
        }
    }
}

#[test]
fn normality_is_atomic_modus_ponens() {
    let mut checked = 0usize;
    let mut normal = 0usize;
    for m in small_implication_matrices() {
        let closed = atomic_modus_ponens_closed(&m);
        assert_eq!(is_normal(&m), closed, "{m:?}");
        checked += 1;
        normal += usize::from(closed);
    }
    assert_eq!(checked, 1 + 16 + 16 + 19683 * 2);
    assert!(normal > 0 && normal < checked);
}
