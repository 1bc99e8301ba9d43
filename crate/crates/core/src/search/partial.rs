//! Matrices with unassigned cells.

use std::fmt;

use crate::formula::{Connective, Formula, Signature};
use crate::matrix::{cell_offset, table_len, Assignment, EvalError, Matrix, Value};
use crate::problems::IndependenceProblem;

/// Where each connective's table starts in the flat cell vector. Tables are
/// laid out in [`Connective::ALL`] order, matching [`Matrix::flatten`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    size: usize,
    signature: Signature,
    offsets: [Option<usize>; 5],
    len: usize,
}

impl Layout {
    pub fn new(size: usize, signature: Signature) -> Self {
        let mut offsets = [None; 5];
        let mut len = 0;
        for c in signature.iter() {
            offsets[c.index()] = Some(len);
            len += table_len(size, c);
        }
        Layout {
            size,
            signature,
            offsets,
            len,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn offset(&self, connective: Connective) -> Option<usize> {
        self.offsets[connective.index()]
    }

    pub fn index(&self, cell: CellRef) -> Option<usize> {
        let base = self.offset(cell.connective)?;
        let args = cell.args();
        if args.len() != cell.connective.arity() || args.iter().any(|&a| a as usize >= self.size) {
            return None;
        }
        Some(base + cell_offset(self.size, &args))
    }

    pub fn cell(&self, index: usize) -> CellRef {
        let connective = self
            .signature
            .iter()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .find(|&c| self.offsets[c.index()].is_some_and(|o| o <= index))
            .expect("index within layout");
        let local = index - self.offsets[connective.index()].unwrap();
        match connective.arity() {
            2 => CellRef::binary(
                connective,
                (local / self.size) as Value,
                (local % self.size) as Value,
            ),
            1 => CellRef::unary(connective, local as Value),
            _ => CellRef::nullary(connective),
        }
    }
}

/// A single table cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRef {
    pub connective: Connective,
    /// Left operand of a binary connective.
    pub row: Option<Value>,
    /// Right operand of a binary connective, or the operand of a unary one.
    pub column: Option<Value>,
}

impl CellRef {
    pub fn binary(connective: Connective, row: Value, column: Value) -> Self {
        CellRef {
            connective,
            row: Some(row),
            column: Some(column),
        }
    }

    pub fn unary(connective: Connective, arg: Value) -> Self {
        CellRef {
            connective,
            row: None,
            column: Some(arg),
        }
    }

    pub fn nullary(connective: Connective) -> Self {
        CellRef {
            connective,
            row: None,
            column: None,
        }
    }

    pub fn args(&self) -> Vec<Value> {
        self.row.into_iter().chain(self.column).collect()
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args().iter().map(|a| a.to_string()).collect();
        if args.is_empty() {
            write!(f, "{}", self.connective)
        } else {
            write!(f, "{}({})", self.connective, args.join(","))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMatrix {
    designated: usize,
    layout: Layout,
    cells: Vec<Option<Value>>,
}

impl PartialMatrix {
    /// Every cell unassigned.
    pub fn new(size: usize, designated: usize, signature: Signature) -> Self {
        let layout = Layout::new(size, signature);
        PartialMatrix {
            designated,
            cells: vec![None; layout.len()],
            layout,
        }
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let layout = Layout::new(m.size(), m.signature());
        PartialMatrix {
            designated: m.designated_count(),
            cells: m.flatten().into_iter().map(Some).collect(),
            layout,
        }
    }

    pub(crate) fn from_cells(designated: usize, layout: Layout, cells: Vec<Option<Value>>) -> Self {
        debug_assert_eq!(cells.len(), layout.len());
        PartialMatrix {
            designated,
            layout,
            cells,
        }
    }

    pub fn size(&self) -> usize {
        self.layout.size
    }

    pub fn designated_count(&self) -> usize {
        self.designated
    }

    pub fn signature(&self) -> Signature {
        self.layout.signature
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn cells(&self) -> &[Option<Value>] {
        &self.cells
    }

    pub fn get(&self, cell: CellRef) -> Option<Value> {
        self.layout.index(cell).and_then(|i| self.cells[i])
    }

    /// Assigns or clears a cell. Panics on a cell outside the layout or an
    /// out-of-range value.
    pub fn set(&mut self, cell: CellRef, value: Option<Value>) {
        let i = self.layout.index(cell).expect("cell within layout");
        self.set_index(i, value);
    }

    pub fn set_index(&mut self, index: usize, value: Option<Value>) {
        if let Some(v) = value {
            assert!((v as usize) < self.size(), "value {v} out of range");
        }
        self.cells[index] = value;
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    pub fn unassigned(&self) -> impl Iterator<Item = CellRef> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(i, _)| self.layout.cell(i))
    }

    /// The completed matrix, if every cell is assigned.
    pub fn to_matrix(&self) -> Option<Matrix> {
        let mut tables: [Option<Vec<Value>>; 5] = Default::default();
        for c in self.signature().iter() {
            let base = self.layout.offset(c).unwrap();
            let cells = &self.cells[base..base + table_len(self.size(), c)];
            tables[c.index()] = Some(cells.iter().copied().collect::<Option<Vec<_>>>()?);
        }
        Matrix::from_tables(self.size(), self.designated, tables).ok()
    }
}

impl From<&Matrix> for PartialMatrix {
    fn from(m: &Matrix) -> Self {
        PartialMatrix::from_matrix(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialValue {
    Known(Value),
    /// Evaluation needs this unassigned cell.
    Unknown(CellRef),
}

/// Bottom-up evaluation that stops at the first unassigned cell, children
/// left to right.
pub fn eval_partial(
    pm: &PartialMatrix,
    f: &Formula,
    a: &Assignment,
) -> Result<PartialValue, EvalError> {
    use PartialValue::*;
    let lookup = |cell: CellRef| -> Result<PartialValue, EvalError> {
        if !pm.signature().contains(cell.connective) {
            return Err(EvalError::MissingConnective(cell.connective));
        }
        Ok(match pm.get(cell) {
            Some(v) => Known(v),
            None => Unknown(cell),
        })
    };
    match f {
        Formula::Var(name) => {
            let v = a
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
            if v as usize >= pm.size() {
                return Err(EvalError::ValueOutOfRange {
                    name: name.clone(),
                    value: v,
                    size: pm.size(),
                });
            }
            Ok(Known(v))
        }
        Formula::False => lookup(CellRef::nullary(Connective::False)),
        Formula::Not(x) => match eval_partial(pm, x, a)? {
            Known(v) => lookup(CellRef::unary(Connective::Not, v)),
            unknown => Ok(unknown),
        },
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Imp(x, y) => {
            let c = f.connective().unwrap();
            let vx = match eval_partial(pm, x, a)? {
                Known(v) => v,
                unknown => return Ok(unknown),
            };
            let vy = match eval_partial(pm, y, a)? {
                Known(v) => v,
                unknown => return Ok(unknown),
            };
            lookup(CellRef::binary(c, vx, vy))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Contradiction {
    /// A designated row and non-designated column holding a designated value.
    Normality(CellRef),
    /// A kept axiom already evaluates to a non-designated value.
    KeptAxiom {
        axiom: String,
        assignment: Assignment,
        value: Value,
    },
}

impl fmt::Display for Contradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contradiction::Normality(cell) => write!(f, "normality violated at {cell}"),
            Contradiction::KeptAxiom {
                axiom,
                assignment,
                value,
            } => write!(
                f,
                "kept axiom {axiom} falsified at {assignment} -> value {value}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    Consistent,
    Contradiction(Contradiction),
}

impl Propagation {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Propagation::Consistent)
    }
}

/// Full rescan of the normality cells and every kept-axiom instance.
///
/// Panics if `pm` lacks a table that one of the kept axioms needs.
pub fn propagate(pm: &PartialMatrix, p: &IndependenceProblem) -> Propagation {
    let d = pm.designated_count() as Value;
    let n = pm.size() as Value;
    for x in 0..d {
        for y in d..n {
            let cell = CellRef::binary(Connective::Imp, x, y);
            if pm.get(cell).is_some_and(|v| v < d) {
                return Propagation::Contradiction(Contradiction::Normality(cell));
            }
        }
    }
    for axiom in p.kept() {
        let vars = axiom.formula.variables();
        for a in crate::matrix::assignments(&vars, pm.size()) {
            let r = eval_partial(pm, &axiom.formula, &a)
                .expect("partial matrix covers the problem signature");
            if let PartialValue::Known(v) = r {
                if v >= d {
                    return Propagation::Contradiction(Contradiction::KeptAxiom {
                        axiom: axiom.name.clone(),
                        assignment: a,
                        value: v,
                    });
                }
            }
        }
    }
    Propagation::Consistent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::matrix::eval;
    use crate::problems::{builtin_matrix, builtin_problem};

    #[test]
    fn layout_indices_round_trip() {
        let layout = Layout::new(3, Signature::full());
        assert_eq!(layout.len(), 9 + 9 + 9 + 3 + 1);
        for i in 0..layout.len() {
            assert_eq!(layout.index(layout.cell(i)), Some(i));
        }
        assert_eq!(layout.cell(0), CellRef::binary(Connective::Imp, 0, 0));
        assert_eq!(layout.cell(9), CellRef::binary(Connective::And, 0, 0));
        assert_eq!(layout.cell(27), CellRef::unary(Connective::Not, 0));
        assert_eq!(layout.cell(30), CellRef::nullary(Connective::False));
        assert_eq!(layout.index(CellRef::binary(Connective::Imp, 3, 0)), None);
        let imp_only = Layout::new(3, Signature::implicational());
        assert_eq!(imp_only.index(CellRef::unary(Connective::Not, 0)), None);
    }

    #[test]
    fn complete_partial_matrix_agrees_with_eval() {
        let m3 = builtin_matrix("M3").unwrap();
        let pm = PartialMatrix::from_matrix(&m3);
        let b = parse("(p -> q) -> (q -> r) -> p -> r").unwrap();
        let a: Assignment = "p=1,q=0,r=1".parse().unwrap();
        assert_eq!(eval_partial(&pm, &b, &a), Ok(PartialValue::Known(2)));
        assert_eq!(eval(&m3, &b, &a), Ok(2));
        assert_eq!(pm.to_matrix(), Some(m3));
    }

    #[test]
    fn single_unassigned_cell_is_reported() {
        let mut pm = PartialMatrix::from_matrix(&builtin_matrix("M3").unwrap());
        let cell = CellRef::binary(Connective::Imp, 1, 0);
        pm.set(cell, None);
        let f = parse("p -> q").unwrap();
        assert_eq!(
            eval_partial(&pm, &f, &"p=1,q=0".parse().unwrap()),
            Ok(PartialValue::Unknown(cell))
        );
        assert_eq!(pm.unassigned().collect::<Vec<_>>(), vec![cell]);
        assert_eq!(pm.to_matrix(), None);
    }

    #[test]
    fn variables_need_no_table() {
        let pm = PartialMatrix::new(3, 2, Signature::implicational());
        assert_eq!(
            eval_partial(&pm, &parse("p").unwrap(), &"p=2".parse().unwrap()),
            Ok(PartialValue::Known(2))
        );
    }

    #[test]
    fn left_operand_blocks_first() {
        let pm = PartialMatrix::new(2, 1, Signature::full());
        let f = parse("(p & q) -> ~p").unwrap();
        assert_eq!(
            eval_partial(&pm, &f, &"p=1,q=0".parse().unwrap()),
            Ok(PartialValue::Unknown(CellRef::binary(
                Connective::And,
                1,
                0
            )))
        );
    }

    #[test]
    fn propagate_on_complete_fixtures() {
        let s = builtin_problem("robinson-S").unwrap();
        let pm = PartialMatrix::from_matrix(&builtin_matrix("M5").unwrap());
        assert_eq!(propagate(&pm, &s), Propagation::Consistent);

        let s4 = s.at(4, 3).unwrap();
        let pm = PartialMatrix::from_matrix(&builtin_matrix("M4").unwrap());
        match propagate(&pm, &s4) {
            Propagation::Contradiction(Contradiction::KeptAxiom {
                axiom,
                assignment,
                value,
            }) => {
                assert_eq!(axiom, "K");
                // First countermodel of K in M4 in enumeration order.
                assert_eq!(assignment, "p=2,q=1".parse().unwrap());
                assert_eq!(value, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn propagate_detects_normality_violation() {
        let s = builtin_problem("robinson-S").unwrap();
        let mut pm = PartialMatrix::new(5, 1, Signature::full());
        pm.set(CellRef::binary(Connective::Imp, 0, 1), Some(0));
        assert_eq!(
            propagate(&pm, &s),
            Propagation::Contradiction(Contradiction::Normality(CellRef::binary(
                Connective::Imp,
                0,
                1
            )))
        );
    }
}
