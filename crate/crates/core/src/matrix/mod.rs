//! Finite logical matrices.
//!
//! A matrix of size `n` has truth values `0..n`; the designated ones are the
//! initial segment `0..d`. Each connective of the signature is interpreted by
//! a table stored row-major, with the row index as the left operand.

mod symmetry;
mod text;

pub use symmetry::{apply_permutation, canonical_form, designation_preserving, Permutation};
pub use text::{
    parse_matrix, parse_matrix_blocks, render_matrix, FormatErrorKind, MatrixBlocks,
    MatrixFormatError, RenderFormat,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{Connective, Formula, Signature};

pub type Value = u8;

/// Largest supported matrix size.
pub const MAX_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix size must be between 1 and {MAX_SIZE}, got {0}")]
    BadSize(usize),
    #[error("designated count must be between 1 and {size}, got {designated}")]
    BadDesignated { designated: usize, size: usize },
    #[error("{connective} table needs {expected} cells, got {found}")]
    TableLength {
        connective: Connective,
        expected: usize,
        found: usize,
    },
    #[error("value {value} out of range for a {size}-valued matrix")]
    ValueOutOfRange { value: usize, size: usize },
    #[error("matrix has no {0} table")]
    MissingTable(Connective),
    #[error("{0:?} is not a permutation of the truth values")]
    NotAPermutation(Vec<Value>),
    #[error("permutation does not preserve the designated values")]
    NotDesignationPreserving,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not assigned")]
    UnboundVariable(String),
    #[error("variable `{name}` has value {value}, out of range for a {size}-valued matrix")]
    ValueOutOfRange {
        name: String,
        value: Value,
        size: usize,
    },
    #[error("connective {0} is not interpreted by the matrix")]
    MissingConnective(Connective),
}

/// Number of cells of a connective's table in an `n`-valued matrix.
pub fn table_len(size: usize, connective: Connective) -> usize {
    size.pow(connective.arity() as u32)
}

/// Offset of the cell `args` inside a row-major table.
pub fn cell_offset(size: usize, args: &[Value]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    size: usize,
    designated: usize,
    tables: [Option<Vec<Value>>; 5],
}

impl Matrix {
    /// A matrix interpreting only implication.
    pub fn new(size: usize, designated: usize, imp: Vec<Value>) -> Result<Self, MatrixError> {
        let mut tables: [Option<Vec<Value>>; 5] = Default::default();
        tables[Connective::Imp.index()] = Some(imp);
        Matrix::from_tables(size, designated, tables)
    }

    /// Tables indexed by [`Connective::index`]; the implication table is
    /// mandatory.
    pub fn from_tables(
        size: usize,
        designated: usize,
        tables: [Option<Vec<Value>>; 5],
    ) -> Result<Self, MatrixError> {
        if size == 0 || size > MAX_SIZE {
            return Err(MatrixError::BadSize(size));
        }
        if designated == 0 || designated > size {
            return Err(MatrixError::BadDesignated { designated, size });
        }
        if tables[Connective::Imp.index()].is_none() {
            return Err(MatrixError::MissingTable(Connective::Imp));
        }
        for c in Connective::ALL {
            if let Some(cells) = &tables[c.index()] {
                check_table(size, c, cells)?;
            }
        }
        Ok(Matrix {
            size,
            designated,
            tables,
        })
    }

    pub fn with_table(
        mut self,
        connective: Connective,
        cells: Vec<Value>,
    ) -> Result<Self, MatrixError> {
        check_table(self.size, connective, &cells)?;
        self.tables[connective.index()] = Some(cells);
        Ok(self)
    }

    /// Copy with a single cell overwritten.
    pub fn with_cell(
        mut self,
        connective: Connective,
        args: &[Value],
        value: Value,
    ) -> Result<Self, MatrixError> {
        if value as usize >= self.size {
            return Err(MatrixError::ValueOutOfRange {
                value: value as usize,
                size: self.size,
            });
        }
        if let Some(&a) = args.iter().find(|&&a| a as usize >= self.size) {
            return Err(MatrixError::ValueOutOfRange {
                value: a as usize,
                size: self.size,
            });
        }
        let size = self.size;
        let table = self.tables[connective.index()]
            .as_mut()
            .ok_or(MatrixError::MissingTable(connective))?;
        table[cell_offset(size, args)] = value;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn designated_count(&self) -> usize {
        self.designated
    }

    pub fn signature(&self) -> Signature {
        Signature::from_connectives(
            Connective::ALL
                .into_iter()
                .filter(|c| self.tables[c.index()].is_some()),
        )
    }

    pub fn table(&self, connective: Connective) -> Option<&[Value]> {
        self.tables[connective.index()].as_deref()
    }

    pub fn tables(&self) -> &[Option<Vec<Value>>; 5] {
        &self.tables
    }

    /// Value of `connective(args)`; `None` when the table is absent.
    pub fn apply(&self, connective: Connective, args: &[Value]) -> Option<Value> {
        let table = self.table(connective)?;
        Some(table[cell_offset(self.size, args)])
    }

    pub fn imp(&self, x: Value, y: Value) -> Value {
        self.tables[Connective::Imp.index()].as_ref().unwrap()[x as usize * self.size + y as usize]
    }

    /// Row `x` of a binary table.
    pub fn row(&self, connective: Connective, x: Value) -> Option<&[Value]> {
        if connective.arity() != 2 {
            return None;
        }
        let start = x as usize * self.size;
        self.table(connective).map(|t| &t[start..start + self.size])
    }

    /// All tables concatenated in layout order: imp, and, or, not, falsum.
    pub fn flatten(&self) -> Vec<Value> {
        self.tables
            .iter()
            .flatten()
            .flat_map(|t| t.iter().copied())
            .collect()
    }

    pub fn values(&self) -> impl Iterator<Item = Value> {
        0..self.size as Value
    }
}

fn check_table(size: usize, connective: Connective, cells: &[Value]) -> Result<(), MatrixError> {
    let expected = table_len(size, connective);
    if cells.len() != expected {
        return Err(MatrixError::TableLength {
            connective,
            expected,
            found: cells.len(),
        });
    }
    if let Some(&v) = cells.iter().find(|&&v| v as usize >= size) {
        return Err(MatrixError::ValueOutOfRange {
            value: v as usize,
            size,
        });
    }
    Ok(())
}

/// Variable bindings, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bindings: Vec<(String, Value)>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`, replacing any earlier binding.
    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        let name = name.into();
        match self.bindings.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.bindings.push((name, value)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.bind(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.bindings.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Renames every value through `f`.
    pub fn map_values(&self, mut f: impl FnMut(Value) -> Value) -> Assignment {
        Assignment {
            bindings: self
                .bindings
                .iter()
                .map(|(n, v)| (n.clone(), f(*v)))
                .collect(),
        }
    }
}

impl<S: Into<String>> FromIterator<(S, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Self {
        let mut a = Assignment::new();
        for (n, v) in iter {
            a.bind(n, v);
        }
        a
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (name, value)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}←{value}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed assignment `{0}`: expected `name=value,...`")]
pub struct AssignmentParseError(pub String);

/// Parses `p=3,q=0,r=2`.
impl FromStr for Assignment {
    type Err = AssignmentParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut a = Assignment::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| AssignmentParseError(part.to_string()))?;
            let name = name.trim();
            if name.is_empty() || !name.starts_with(|c: char| c.is_ascii_lowercase()) {
                return Err(AssignmentParseError(part.to_string()));
            }
            let value = value
                .trim()
                .parse::<Value>()
                .map_err(|_| AssignmentParseError(part.to_string()))?;
            a.bind(name, value);
        }
        Ok(a)
    }
}

pub fn is_designated(m: &Matrix, v: Value) -> Result<bool, MatrixError> {
    if v as usize >= m.size {
        return Err(MatrixError::ValueOutOfRange {
            value: v as usize,
            size: m.size,
        });
    }
    Ok((v as usize) < m.designated)
}

fn eval_with<F>(m: &Matrix, f: &Formula, lookup: &F) -> Result<Value, EvalError>
where
    F: Fn(&str) -> Option<Value>,
{
    let missing = |c| EvalError::MissingConnective(c);
    match f {
        Formula::Var(name) => {
            let v = lookup(name).ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
            if v as usize >= m.size {
                return Err(EvalError::ValueOutOfRange {
                    name: name.clone(),
                    value: v,
                    size: m.size,
                });
            }
            Ok(v)
        }
        Formula::False => m
            .apply(Connective::False, &[])
            .ok_or(missing(Connective::False)),
        Formula::Not(a) => {
            let x = eval_with(m, a, lookup)?;
            m.apply(Connective::Not, &[x])
                .ok_or(missing(Connective::Not))
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            let c = f.connective().unwrap();
            let x = eval_with(m, a, lookup)?;
            let y = eval_with(m, b, lookup)?;
            m.apply(c, &[x, y]).ok_or(missing(c))
        }
    }
}

/// Evaluates `f` by table lookup.
pub fn eval(m: &Matrix, f: &Formula, a: &Assignment) -> Result<Value, EvalError> {
    eval_with(m, f, &|name| a.get(name))
}

/// Whether implication is normal: a designated antecedent and a designated
/// implication always give a designated consequent.
pub fn is_normal(m: &Matrix) -> bool {
    let d = m.designated as Value;
    let n = m.size as Value;
    (0..d).all(|x| (d..n).all(|y| m.imp(x, y) >= d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Countermodel {
        assignment: Assignment,
        value: Value,
    },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }

    pub fn countermodel(&self) -> Option<(&Assignment, Value)> {
        match self {
            Validity::Valid => None,
            Validity::Countermodel { assignment, value } => Some((assignment, *value)),
        }
    }
}

/// Every assignment of `vars` to `0..size`, first variable slowest.
pub fn assignments(vars: &[String], size: usize) -> impl Iterator<Item = Assignment> + '_ {
    Odometer::new(vars.len(), size)
        .map(move |values| vars.iter().cloned().zip(values.iter().copied()).collect())
}

/// Counts through `size^len` tuples in lexicographic order.
pub(crate) struct Odometer {
    digits: Vec<Value>,
    size: usize,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(len: usize, size: usize) -> Self {
        Odometer {
            digits: vec![0; len],
            size,
            done: size == 0,
        }
    }

    /// Current tuple; call [`Odometer::advance`] to move on.
    pub(crate) fn step(&mut self) -> Option<&[Value]> {
        if self.done {
            return None;
        }
        Some(&self.digits)
    }

    pub(crate) fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            if (self.digits[i] as usize) + 1 < self.size {
                self.digits[i] += 1;
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

impl Iterator for Odometer {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Vec<Value>> {
        let current = self.step()?.to_vec();
        self.advance();
        Some(current)
    }
}

/// Checks `f` under every assignment in canonical order and reports the
/// first non-designated result.
pub fn validates(m: &Matrix, f: &Formula) -> Result<Validity, EvalError> {
    if let Some(c) = f.signature().iter().find(|&c| !m.signature().contains(c)) {
        return Err(EvalError::MissingConnective(c));
    }
    let vars = f.variables();
    let mut odometer = Odometer::new(vars.len(), m.size);
    while let Some(values) = odometer.step() {
        let lookup = |name: &str| vars.iter().position(|v| v == name).map(|i| values[i]);
        let value = eval_with(m, f, &lookup)?;
        if value as usize >= m.designated {
            return Ok(Validity::Countermodel {
                assignment: vars.iter().cloned().zip(values.iter().copied()).collect(),
                value,
            });
        }
        odometer.advance();
    }
    Ok(Validity::Valid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::problems::builtin_matrix;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn designation_is_an_initial_segment() {
        let m5 = builtin_matrix("M5").unwrap();
        let m4 = builtin_matrix("M4").unwrap();
        assert!(is_designated(&m5, 0).unwrap());
        assert!(!is_designated(&m5, 1).unwrap());
        assert!(is_designated(&m4, 2).unwrap());
        assert!(!is_designated(&m4, 3).unwrap());
        assert!(is_designated(&m4, 4).is_err());
    }

    #[test]
    fn eval_reproduces_lookup_chains() {
        let s = f("(p -> q -> r) -> (p -> q) -> p -> r");
        let m5 = builtin_matrix("M5").unwrap();
        let a: Assignment = "p=3,q=0,r=2".parse().unwrap();
        assert_eq!(eval(&m5, &s, &a), Ok(1));

        let k = f("p -> q -> p");
        let m4 = builtin_matrix("M4").unwrap();
        assert_eq!(eval(&m4, &k, &"p=2,q=1".parse().unwrap()), Ok(3));

        let b = f("(p -> q) -> (q -> r) -> p -> r");
        let m3 = builtin_matrix("M3").unwrap();
        assert_eq!(eval(&m3, &b, &"p=1,q=0,r=1".parse().unwrap()), Ok(2));
    }

    #[test]
    fn eval_errors() {
        let m3 = builtin_matrix("M3").unwrap();
        assert_eq!(
            eval(&m3, &f("p -> q"), &"p=1".parse().unwrap()),
            Err(EvalError::UnboundVariable("q".into()))
        );
        assert_eq!(
            eval(&m3, &f("p & q"), &"p=1,q=0".parse().unwrap()),
            Err(EvalError::MissingConnective(Connective::And))
        );
        assert!(matches!(
            eval(&m3, &f("p"), &"p=3".parse().unwrap()),
            Err(EvalError::ValueOutOfRange { .. })
        ));
        assert!(validates(&m3, &f("~p")).is_err());
    }

    #[test]
    fn normality_of_fixtures() {
        for name in ["M5", "M4", "M3", "B2"] {
            assert!(is_normal(&builtin_matrix(name).unwrap()), "{name}");
        }
        let broken = builtin_matrix("M5")
            .unwrap()
            .with_cell(Connective::Imp, &[0, 1], 0)
            .unwrap();
        assert!(!is_normal(&broken));
    }

    #[test]
    fn degenerate_matrix_is_vacuously_normal() {
        let m = Matrix::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert!(is_normal(&m));
        assert!(validates(&m, &f("p")).unwrap().is_valid());
    }

    #[test]
    fn validates_reports_first_countermodel() {
        let b2 = builtin_matrix("B2").unwrap();
        assert_eq!(
            validates(&b2, &f("p -> q")).unwrap(),
            Validity::Countermodel {
                assignment: "p=0,q=1".parse().unwrap(),
                value: 1
            }
        );
        assert_eq!(validates(&b2, &f("F -> p")).unwrap(), Validity::Valid);
    }

    #[test]
    fn first_countermodel_of_s_in_m5() {
        // The first countermodel in enumeration order happens to be the
        // textbook witness; frozen from an external scan of all 125
        // assignments and rechecked here by brute force.
        let m5 = builtin_matrix("M5").unwrap();
        let s = f("(p -> q -> r) -> (p -> q) -> p -> r");
        let first = assignments(&s.variables(), 5)
            .map(|a| (eval(&m5, &s, &a).unwrap(), a))
            .find(|(v, _)| *v >= 1)
            .unwrap();
        assert_eq!(first.1, "p=3,q=0,r=2".parse().unwrap());
        assert_eq!(first.0, 1);
        assert_eq!(
            validates(&m5, &s).unwrap(),
            Validity::Countermodel {
                assignment: "p=3,q=0,r=2".parse().unwrap(),
                value: 1
            }
        );
    }

    #[test]
    fn assignment_enumeration_order_and_count() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let all: Vec<_> = assignments(&vars, 3).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], "p=0,q=0".parse().unwrap());
        assert_eq!(all[1], "p=0,q=1".parse().unwrap());
        assert_eq!(all[3], "p=1,q=0".parse().unwrap());
        assert_eq!(assignments(&[], 4).count(), 1);
    }

    #[test]
    fn assignment_text() {
        let a: Assignment = "p=3, q=0,r=2".parse().unwrap();
        assert_eq!(a.to_string(), "[p←3, q←0, r←2]");
        assert!("p".parse::<Assignment>().is_err());
        assert!("p=x".parse::<Assignment>().is_err());
        assert!("P=1".parse::<Assignment>().is_err());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Matrix::new(0, 1, vec![]), Err(MatrixError::BadSize(0)));
        assert!(matches!(
            Matrix::new(2, 3, vec![0; 4]),
            Err(MatrixError::BadDesignated { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 1, vec![0; 3]),
            Err(MatrixError::TableLength { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 1, vec![0, 0, 0, 2]),
            Err(MatrixError::ValueOutOfRange { value: 2, size: 2 })
        ));
        let m = Matrix::new(2, 1, vec![0, 1, 0, 0]).unwrap();
        assert_eq!(
            m.with_cell(Connective::Not, &[0], 1),
            Err(MatrixError::MissingTable(Connective::Not))
        );
    }
}
