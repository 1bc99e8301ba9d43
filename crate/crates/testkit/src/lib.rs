//! Strategies and property checks shared by the library and acceptance suites.
//!
//! Each `check_*` function asserts one property for one generated case and
//! returns a `TestCaseError` on violation, so callers can drive it either
//! through the `proptest!` macro or an explicit `TestRunner`.

use axmat::formula::{Connective, Formula, Signature};
use axmat::matrix::{
    apply_permutation, assignments, designation_preserving, is_designated, table_len, Permutation,
    Value,
};
use axmat::problems::IndependenceProblem;
use axmat::search::{propagate, PartialMatrix, Propagation};
use axmat::{
    builtin_problem, check_solution, eval, is_normal, parse, parse_matrix, render_formula,
    render_matrix, validates, Matrix, RenderFormat,
};
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::TestCaseError;

pub const VARS: [&str; 4] = ["p", "q", "r", "s"];

/// Random formulas over `p..s`; `full` adds conjunction, disjunction,
/// negation and falsum to implication.
pub fn formula(full: bool) -> BoxedStrategy<Formula> {
    let leaf = if full {
        prop_oneof![4 => select(&VARS[..]).prop_map(Formula::var), 1 => Just(Formula::False)]
            .boxed()
    } else {
        select(&VARS[..]).prop_map(Formula::var).boxed()
    };
    leaf.prop_recursive(5, 24, 2, move |inner| {
        if full {
            prop_oneof![
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                1 => inner.prop_map(Formula::not),
            ]
            .boxed()
        } else {
            (inner.clone(), inner)
                .prop_map(|(a, b)| Formula::imp(a, b))
                .boxed()
        }
    })
    .boxed()
}

pub fn matrix_with(size: usize, designated: usize, signature: Signature) -> BoxedStrategy<Matrix> {
    let tables: Vec<BoxedStrategy<Option<Vec<Value>>>> = Connective::ALL
        .iter()
        .map(|&c| {
            if signature.contains(c) {
                prop::collection::vec(0..size as Value, table_len(size, c))
                    .prop_map(Some)
                    .boxed()
            } else {
                Just(None).boxed()
            }
        })
        .collect();
    tables
        .prop_map(move |t| {
            let tables: [Option<Vec<Value>>; 5] = t.try_into().expect("one entry per connective");
            Matrix::from_tables(size, designated, tables).expect("generated cells are in range")
        })
        .boxed()
}

/// Matrices of size `1..=max_size`, any designated count, with either the
/// implicational or the full signature.
pub fn matrix(max_size: usize) -> BoxedStrategy<Matrix> {
    (1..=max_size, any::<bool>())
        .prop_flat_map(|(n, full)| {
            let sig = if full {
                Signature::full()
            } else {
                Signature::implicational()
            };
            (1..=n).prop_flat_map(move |d| matrix_with(n, d, sig))
        })
        .boxed()
}

/// Overwrites every normality-violating implication cell with an
/// undesignated value.
pub fn normalised(m: Matrix) -> Matrix {
    let n = m.size() as Value;
    let d = m.designated_count() as Value;
    let mut out = m.clone();
    for x in 0..d {
        for y in d..n {
            let v = m.imp(x, y);
            if v < d {
                out = out
                    .with_cell(Connective::Imp, &[x, y], d + v % (n - d))
                    .unwrap();
            }
        }
    }
    out
}

pub fn permutation_for(m: &Matrix, pick: usize) -> Permutation {
    let perms = designation_preserving(m.size(), m.designated_count());
    perms[pick % perms.len()].clone()
}

/// Single-configuration problems small enough to check many completions.
pub const SMALL_PROBLEMS: [(&str, usize, usize); 7] = [
    ("meyer-parks-B'", 2, 1),
    ("meyer-parks-B'", 3, 1),
    ("meyer-parks-B'", 3, 2),
    ("meyer-parks-B'", 4, 2),
    ("robinson-K", 2, 1),
    ("robinson-S", 3, 1),
    ("robinson-S", 3, 2),
];

/// A partial matrix for a small problem plus random completions of it.
#[derive(Clone, Debug)]
pub struct PartialCase {
    pub problem: IndependenceProblem,
    pub base: Matrix,
    pub partial: PartialMatrix,
    pub completions: Vec<Matrix>,
}

fn blank(m: &Matrix, mask: &[bool]) -> PartialMatrix {
    let mut pm = PartialMatrix::from_matrix(m);
    for (i, &drop) in mask.iter().enumerate() {
        if drop {
            pm.set_index(i, None);
        }
    }
    pm
}

fn fill(pm: &PartialMatrix, filler: &[Value]) -> Matrix {
    let mut pm = pm.clone();
    for (i, &v) in filler.iter().enumerate() {
        if pm.cells()[i].is_none() {
            pm.set_index(i, Some(v));
        }
    }
    pm.to_matrix().expect("every cell is filled")
}

/// Blanks a random subset of cells of `m` and draws `k` completions.
pub fn partial_of(m: Matrix, k: usize) -> BoxedStrategy<(Matrix, PartialMatrix, Vec<Matrix>)> {
    let len = PartialMatrix::from_matrix(&m).cells().len();
    let n = m.size() as Value;
    (
        0u32..100,
        prop::collection::vec(0u32..100, len),
        prop::collection::vec(prop::collection::vec(0..n, len), k),
    )
        .prop_map(move |(threshold, rolls, fillers)| {
            let mask: Vec<bool> = rolls.iter().map(|&r| r < threshold).collect();
            let pm = blank(&m, &mask);
            let completions = fillers.iter().map(|f| fill(&pm, f)).collect();
            (m.clone(), pm, completions)
        })
        .boxed()
}

pub fn partial_case(completions: usize) -> BoxedStrategy<PartialCase> {
    select(&SMALL_PROBLEMS[..])
        .prop_flat_map(move |(name, n, d)| {
            let problem = builtin_problem(name).unwrap().at(n, d).unwrap();
            let sig = problem.signature();
            matrix_with(n, d, sig)
                .prop_flat_map(move |m| partial_of(m, completions))
                .prop_map(move |(base, partial, completions)| PartialCase {
                    problem: problem.clone(),
                    base,
                    partial,
                    completions,
                })
        })
        .boxed()
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

pub fn check_formula_round_trip(f: &Formula) -> Result<(), TestCaseError> {
    let text = render_formula(f);
    match parse(&text) {
        Ok(g) if &g == f => Ok(()),
        Ok(g) => fail(format!("`{text}` re-parsed as {g:?}")),
        Err(e) => fail(format!("`{text}` failed to parse: {e}")),
    }
}

pub fn check_matrix_round_trip(m: &Matrix) -> Result<(), TestCaseError> {
    let text = render_matrix(m, RenderFormat::Native);
    match parse_matrix(&text) {
        Ok(back) if &back == m => Ok(()),
        Ok(_) => fail(format!("round trip changed the matrix:\n{text}")),
        Err(e) => fail(format!("rendered text failed to parse: {e}\n{text}")),
    }
}

/// Validity, countermodel values and normality are preserved by every
/// designation-preserving conjugation.
pub fn check_permutation_invariance(
    m: &Matrix,
    f: &Formula,
    pick: usize,
) -> Result<(), TestCaseError> {
    let f = if m.signature().is_superset_of(f.signature()) {
        f.clone()
    } else {
        Formula::imp(Formula::var("p"), Formula::var("q"))
    };
    let perm = permutation_for(m, pick);
    let image = apply_permutation(m, &perm).unwrap();
    let before = validates(m, &f).unwrap();
    let after = validates(&image, &f).unwrap();
    prop_assert_eq!(before.is_valid(), after.is_valid());
    if let Some((a, v)) = before.countermodel() {
        let moved = a.map_values(|x| perm.apply(x));
        let w = eval(&image, &f, &moved).unwrap();
        prop_assert_eq!(w, perm.apply(v));
        prop_assert!(!is_designated(&image, w).unwrap());
    }
    prop_assert_eq!(is_normal(m), is_normal(&image));
    Ok(())
}

/// A contradiction rules out every completion; a consistent complete matrix
/// keeps every axiom and is normal.
pub fn check_prune_soundness(case: &PartialCase) -> Result<(), TestCaseError> {
    match propagate(&case.partial, &case.problem) {
        Propagation::Contradiction(reason) => {
            for m in &case.completions {
                let verdict = check_solution(&case.problem, m).unwrap();
                if verdict.normality_ok && verdict.failures().next().is_none() {
                    return fail(format!(
                        "{reason} rejected a completion keeping every axiom: {m:?}"
                    ));
                }
            }
        }
        Propagation::Consistent => {
            if case.partial.is_complete() {
                let verdict = check_solution(&case.problem, &case.base).unwrap();
                prop_assert!(verdict.normality_ok && verdict.failures().next().is_none());
            }
        }
    }
    Ok(())
}

/// Every implication table over `1..=3` values with `1..=min(n, 2)`
/// designated.
pub fn small_implication_matrices() -> impl Iterator<Item = Matrix> {
    (1..=3usize).flat_map(|n| {
        (1..=n.min(2)).flat_map(move |d| {
            let vals: Vec<String> = (0..n * n).map(|i| format!("c{i}")).collect();
            assignments(&vals, n)
                .map(move |a| Matrix::new(n, d, a.iter().map(|(_, v)| v).collect()).unwrap())
                .collect::<Vec<_>>()
        })
    })
}

/// Normality holds iff no atomic instance `p, p -> q / q` leads from
/// designated premises to an undesignated conclusion; evaluated through the
/// formula evaluator rather than by reading the table.
pub fn atomic_modus_ponens_closed(m: &Matrix) -> bool {
    let p = Formula::var("p");
    let q = Formula::var("q");
    let pq = Formula::imp(p.clone(), q.clone());
    let vars = ["p".to_string(), "q".to_string()];
    let closed = assignments(&vars, m.size()).all(|a| {
        let designated = |f: &Formula| is_designated(m, eval(m, f, &a).unwrap()).unwrap();
        !(designated(&p) && designated(&pq)) || designated(&q)
    });
    closed
}
