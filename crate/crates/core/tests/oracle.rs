use std::collections::BTreeSet;

use axmat::{
    builtin_matrix, builtin_problem, canonical_form, check_solution, exhaustive_oracle, search,
    Designation, Matrix, SearchConfig, SearchStatus,
};

fn search_set(size: usize, d: usize, canonical_only: bool) -> BTreeSet<Matrix> {
    let p = builtin_problem("meyer-parks-B'")
        .unwrap()
        .at(size, d)
        .unwrap();
    let cfg = SearchConfig {
        canonical_only,
        ..SearchConfig::default()
    };
    let out = search(&p, &cfg).unwrap();
    assert_eq!(out.status, SearchStatus::Exhausted);
    out.solutions.into_iter().map(|s| s.matrix).collect()
}

#[test]
fn size_three_matches_oracle() {
    let p = builtin_problem("meyer-parks-B'").unwrap();
    let oracle = exhaustive_oracle(&p, 3, 2).unwrap();
    // Frozen from an independent brute force over all 3^9 tables.
    let expected: Vec<Vec<u8>> = vec![
        vec![0, 0, 2, 0, 2, 2, 0, 0, 0],
        vec![0, 0, 2, 0, 2, 2, 1, 0, 0],
        vec![2, 1, 2, 1, 1, 2, 1, 0, 1],
        vec![2, 1, 2, 1, 1, 2, 1, 1, 1],
    ];
    let imps: Vec<Vec<u8>> = oracle.iter().map(|m| m.flatten()).collect();
    assert_eq!(imps, expected);
    assert!(oracle.contains(&builtin_matrix("M3").unwrap()));
    assert_eq!(search_set(3, 2, false), oracle.iter().cloned().collect());
}

#[test]
fn size_two_matches_oracle() {
    let p = builtin_problem("meyer-parks-B'").unwrap();
    let oracle = exhaustive_oracle(&p, 2, 1).unwrap();
    assert!(oracle.is_empty());
    assert_eq!(search_set(2, 1, false), oracle.into_iter().collect());
}

#[test]
fn canonical_mode_covers_every_orbit() {
    let p = builtin_problem("meyer-parks-B'").unwrap();
    let oracle = exhaustive_oracle(&p, 3, 2).unwrap();
    let emitted = search_set(3, 2, true);
    let forms: BTreeSet<Matrix> = emitted.iter().map(canonical_form).collect();
    assert_eq!(
        forms.len(),
        emitted.len(),
        "emitted matrices are pairwise non-isomorphic"
    );
    for m in &emitted {
        assert_eq!(&canonical_form(m), m);
    }
    for m in &oracle {
        assert!(forms.contains(&canonical_form(m)));
    }
    assert!(emitted.contains(&canonical_form(&builtin_matrix("M3").unwrap())));
}

#[test]
fn small_full_signature_search_matches_oracle() {
    // Size 2 with the full signature has 2^11 cells, within the oracle guard.
    let p = builtin_problem("robinson-K").unwrap().at(2, 1).unwrap();
    let oracle = exhaustive_oracle(&p, 2, 1).unwrap();
    let found = search(&p, &SearchConfig::default()).unwrap();
    let found: BTreeSet<Matrix> = found.solutions.into_iter().map(|s| s.matrix).collect();
    assert_eq!(found, oracle.iter().cloned().collect());
    for m in &oracle {
        assert!(check_solution(&p, m).unwrap().pass());
    }
}

#[test]
fn exhaustion_is_stable_across_workers_and_orders() {
    use axmat::search::CellOrder;
    let p = builtin_problem("meyer-parks-B'")
        .unwrap()
        .with_space(2..=3, Designation::Any)
        .unwrap();
    let mut seen = Vec::new();
    for workers in [1, 3] {
        for cell_order in [CellOrder::TableOrder, CellOrder::Reversed] {
            let cfg = SearchConfig {
                workers,
                cell_order,
                canonical_only: true,
                ..SearchConfig::default()
            };
            let out = search(&p, &cfg).unwrap();
            let mut found: Vec<(usize, usize)> = out
                .solutions
                .iter()
                .map(|s| (s.matrix.size(), s.matrix.designated_count()))
                .collect();
            found.sort();
            seen.push((out.status, found));
        }
    }
    assert!(seen.iter().all(|s| *s == seen[0]), "{seen:?}");
    assert!(
        seen[0].1.iter().all(|&(size, _)| size == 3),
        "size 2 has no solution"
    );
}
