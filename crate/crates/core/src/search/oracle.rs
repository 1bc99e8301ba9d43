//! Unpruned enumeration of every complete matrix, used to cross-check the
//! search.

use crate::formula::Connective;
use crate::matrix::{table_len, Matrix, Odometer, Value};
use crate::problems::{check_solution, IndependenceProblem};

use super::SearchError;

/// Largest number of complete matrices the oracle will enumerate.
pub const ORACLE_SPACE_LIMIT: u128 = 100_000_000;

/// Every solution of `p` at the given size and designated count, sorted.
/// No normality restriction, propagation or symmetry breaking is applied.
pub fn exhaustive_oracle(
    p: &IndependenceProblem,
    size: usize,
    designated: usize,
) -> Result<Vec<Matrix>, SearchError> {
    let p = p.at(size, designated)?;
    let connectives: Vec<Connective> = p.signature().iter().collect();
    let cells: usize = connectives.iter().map(|&c| table_len(size, c)).sum();
    let space = (size as u128).checked_pow(cells as u32);
    if space.is_none_or(|s| s > ORACLE_SPACE_LIMIT) {
        return Err(SearchError::OracleTooLarge { size, cells });
    }
    let mut solutions = Vec::new();
    let mut odometer = Odometer::new(cells, size);
    while let Some(flat) = odometer.step() {
        let mut tables: [Option<Vec<Value>>; 5] = Default::default();
        let mut rest = flat;
        for &c in &connectives {
            let (head, tail) = rest.split_at(table_len(size, c));
            tables[c.index()] = Some(head.to_vec());
            rest = tail;
        }
        let m = Matrix::from_tables(size, designated, tables).expect("odometer stays in range");
        if check_solution(&p, &m)
            .expect("matrix built from the problem signature")
            .pass()
        {
            solutions.push(m);
        }
        odometer.advance();
    }
    solutions.sort();
    Ok(solutions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin_problem;

    #[test]
    fn refuses_oversized_spaces() {
        let p = builtin_problem("robinson-S").unwrap();
        assert!(matches!(
            exhaustive_oracle(&p, 3, 1),
            Err(SearchError::OracleTooLarge { size: 3, cells: 31 })
        ));
    }

    #[test]
    fn no_two_valued_separation_of_s() {
        let p = builtin_problem("robinson-S").unwrap();
        assert_eq!(exhaustive_oracle(&p, 2, 1).unwrap(), vec![]);
    }
}
