//! Independence proofs for propositional axioms via finite logical matrices.
//!
//! A normal matrix that validates a set of axioms but falsifies another
//! formula shows that formula is not derivable from the axioms by modus
//! ponens. This crate parses formulas, checks candidate matrices and
//! searches for new ones.

pub mod formula;
pub mod matrix;
pub mod problems;
pub mod search;

pub use formula::{
    parse, render_formula, variables_of, Connective, Formula, ParseError, Signature,
};
pub use matrix::{
    apply_permutation, canonical_form, eval, is_designated, is_normal, parse_matrix, render_matrix,
    validates, Assignment, Matrix, Permutation, RenderFormat, Validity, Value,
};
pub use problems::{
    builtin_matrix, builtin_problem, check_solution, parse_problem, render_problem, Designation,
    IndependenceProblem, NamedFormula, Verdict, BUILTIN_MATRICES, BUILTIN_PROBLEMS,
};
pub use search::{
    exhaustive_oracle, search, search_with, SearchConfig, SearchOutcome, SearchStatus, Solution,
};
