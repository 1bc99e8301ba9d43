//! Depth-first cell assignment with watched axiom instances.
//!
//! Every (axiom, assignment) pair is an instance. An instance whose
//! evaluation is blocked on an unassigned cell sits in that cell's watch
//! list and is re-evaluated only when the cell gets a value. Moves between
//! watch lists are recorded on a trail and undone on backtrack, so watch
//! lists behave as stacks.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Instant;

use crate::formula::{Connective, Formula};
use crate::matrix::{
    canonical_form, cell_offset, designation_preserving, table_len, Matrix, Value,
};
use crate::problems::{check_solution, IndependenceProblem};

use super::partial::{propagate, Layout, PartialMatrix, Propagation};
use super::{CellOrder, PropagationMode, PruneCause, SearchConfig, SearchStats, Solution};

#[derive(Clone, Copy, Debug)]
enum Op {
    Var(u8),
    /// Absolute index of a nullary cell.
    Const(u32),
    Unary(u32),
    Binary(u32),
}

struct Program {
    ops: Vec<Op>,
    vars: usize,
}

fn compile(f: &Formula, vars: &[String], layout: &Layout, out: &mut Vec<Op>) {
    let base = |c: Connective| layout.offset(c).expect("signature covers the problem") as u32;
    match f {
        Formula::Var(name) => {
            let i = vars.iter().position(|v| v == name).unwrap();
            out.push(Op::Var(i as u8));
        }
        Formula::False => out.push(Op::Const(base(Connective::False))),
        Formula::Not(a) => {
            compile(a, vars, layout, out);
            out.push(Op::Unary(base(Connective::Not)));
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            compile(a, vars, layout, out);
            compile(b, vars, layout, out);
            out.push(Op::Binary(base(f.connective().unwrap())));
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Kept,
    Target,
}

struct Instance {
    program: u32,
    kind: Kind,
    values: u32,
}

/// A designation-preserving permutation acting on cell indices.
struct Symmetry {
    source: Vec<u32>,
    map: Vec<Value>,
}

#[derive(Clone)]
struct RootState {
    cells: Vec<Option<Value>>,
    watches: Vec<Vec<u32>>,
    target_pending: usize,
    target_false: usize,
}

/// Immutable per-configuration search data shared by all workers.
pub(crate) struct Prepared {
    pub(crate) problem: IndependenceProblem,
    size: usize,
    designated: Value,
    layout: Layout,
    programs: Vec<Program>,
    instances: Vec<Instance>,
    values: Vec<Value>,
    domains: Vec<Vec<Value>>,
    pub(crate) order: Vec<usize>,
    root: Option<RootState>,
    symmetries: Vec<Symmetry>,
    canonical_only: bool,
    naive: bool,
    prune_valid_target: bool,
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

/// Cancellation shared by every worker of a search.
pub(crate) struct Control {
    pub(crate) cancel: AtomicBool,
    pub(crate) budget_hit: AtomicBool,
    pub(crate) limit_hit: AtomicBool,
    pub(crate) deadline: Option<Instant>,
    pub(crate) emitted: AtomicUsize,
}

impl Control {
    pub(crate) fn new(deadline: Option<Instant>) -> Self {
        Control {
            cancel: AtomicBool::new(false),
            budget_hit: AtomicBool::new(false),
            limit_hit: AtomicBool::new(false),
            deadline,
            emitted: AtomicUsize::new(0),
        }
    }

    pub(crate) fn cancelled(&self) -> bool {
        self.cancel.load(Ordering::Relaxed)
    }

    pub(crate) fn check_deadline(&self) {
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.budget_hit.store(true, Ordering::Relaxed);
                self.cancel.store(true, Ordering::Relaxed);
            }
        }
    }
}

impl Prepared {
    /// `problem` must already be restricted to one size and designated count.
    pub(crate) fn new(
        problem: IndependenceProblem,
        cfg: &SearchConfig,
        stats: &mut SearchStats,
    ) -> Prepared {
        let size = *problem.sizes().start();
        let designated = problem.designation().counts_for(size)[0];
        let d = designated as Value;
        let n = size as Value;
        let layout = Layout::new(size, problem.signature());

        let mut programs = Vec::new();
        let mut instances = Vec::new();
        let mut values = Vec::new();
        let axioms = problem
            .kept()
            .iter()
            .map(|a| (Kind::Kept, &a.formula))
            .chain(std::iter::once((Kind::Target, &problem.target().formula)));
        for (kind, f) in axioms {
            let vars = f.variables();
            let mut ops = Vec::new();
            compile(f, &vars, &layout, &mut ops);
            let program = programs.len() as u32;
            programs.push(Program {
                ops,
                vars: vars.len(),
            });
            for tuple in crate::matrix::Odometer::new(vars.len(), size) {
                instances.push(Instance {
                    program,
                    kind,
                    values: values.len() as u32,
                });
                values.extend(tuple);
            }
        }

        let mut domains: Vec<Vec<Value>> = vec![(0..n).collect(); layout.len()];
        let imp = layout.offset(Connective::Imp).unwrap();
        for x in 0..d {
            for y in d..n {
                domains[imp + cell_offset(size, &[x, y])] = (d..n).collect();
                stats.normality_restricted_cells += 1;
            }
        }

        let mut cells = vec![None; layout.len()];
        for (c, table) in &cfg.fixed {
            let base = layout.offset(*c).expect("fixed tables were validated");
            for (i, &v) in table.iter().enumerate() {
                cells[base + i] = Some(v);
            }
        }
        let mut order: Vec<usize> = (0..layout.len()).filter(|&i| cells[i].is_none()).collect();
        if cfg.cell_order == CellOrder::Reversed {
            order.reverse();
        }

        let symmetries = if cfg.canonical_only {
            designation_preserving(size, designated)
                .into_iter()
                .skip(1)
                .map(|perm| {
                    let inv = perm.inverse();
                    let source = (0..layout.len())
                        .map(|j| {
                            let cell = layout.cell(j);
                            let mut mapped = cell;
                            mapped.row = cell.row.map(|v| inv.apply(v));
                            mapped.column = cell.column.map(|v| inv.apply(v));
                            layout.index(mapped).unwrap() as u32
                        })
                        .collect();
                    Symmetry {
                        source,
                        map: perm.images().to_vec(),
                    }
                })
                .collect()
        } else {
            Vec::new()
        };

        let mut prepared = Prepared {
            problem,
            size,
            designated: d,
            layout,
            programs,
            instances,
            values,
            domains,
            order,
            root: None,
            symmetries,
            canonical_only: cfg.canonical_only,
            naive: cfg.propagation == PropagationMode::Naive,
            prune_valid_target: cfg.prune_valid_target,
        };
        prepared.root = prepared.root_state(cells, stats);
        prepared
    }

    fn root_state(&self, cells: Vec<Option<Value>>, stats: &mut SearchStats) -> Option<RootState> {
        let imp = self.layout.offset(Connective::Imp).unwrap();
        for x in 0..self.designated {
            for y in self.designated..self.size as Value {
                if cells[imp + cell_offset(self.size, &[x, y])].is_some_and(|v| v < self.designated)
                {
                    stats.record(PruneCause::Normality);
                    return None;
                }
            }
        }
        if self.naive {
            let pm = PartialMatrix::from_cells(
                self.designated as usize,
                self.layout.clone(),
                cells.clone(),
            );
            if !propagate(&pm, &self.problem).is_consistent() {
                stats.record(PruneCause::KeptAxiom);
                return None;
            }
        }
        let mut root = RootState {
            watches: vec![Vec::new(); self.layout.len()],
            target_pending: 0,
            target_false: 0,
            cells,
        };
        let mut stack = Vec::new();
        for (id, inst) in self.instances.iter().enumerate() {
            match self.eval(inst, &root.cells, &mut stack) {
                Ok(v) => match inst.kind {
                    Kind::Kept if v >= self.designated && !self.naive => {
                        stats.record(PruneCause::KeptAxiom);
                        return None;
                    }
                    Kind::Kept => {}
                    Kind::Target => root.target_false += usize::from(v >= self.designated),
                },
                Err(cell) => {
                    if inst.kind == Kind::Target {
                        root.target_pending += 1;
                    }
                    root.watches[cell].push(id as u32);
                }
            }
        }
        if self.prune_valid_target
            && !self.naive
            && root.target_pending == 0
            && root.target_false == 0
        {
            stats.record(PruneCause::TargetValid);
            return None;
        }
        Some(root)
    }

    pub(crate) fn is_feasible(&self) -> bool {
        self.root.is_some()
    }

    /// Evaluates an instance; `Err` carries the first unassigned cell.
    fn eval(
        &self,
        inst: &Instance,
        cells: &[Option<Value>],
        stack: &mut Vec<Value>,
    ) -> Result<Value, usize> {
        let program = &self.programs[inst.program as usize];
        let vals = &self.values[inst.values as usize..inst.values as usize + program.vars];
        let n = self.size;
        stack.clear();
        for op in &program.ops {
            let cell = match *op {
                Op::Var(i) => {
                    stack.push(vals[i as usize]);
                    continue;
                }
                Op::Const(c) => c as usize,
                Op::Unary(base) => {
                    let x = stack.pop().unwrap();
                    base as usize + x as usize
                }
                Op::Binary(base) => {
                    let y = stack.pop().unwrap();
                    let x = stack.pop().unwrap();
                    base as usize + x as usize * n + y as usize
                }
            };
            stack.push(cells[cell].ok_or(cell)?);
        }
        Ok(stack[0])
    }

    fn matrix_from(&self, cells: &[Option<Value>]) -> Matrix {
        let mut tables: [Option<Vec<Value>>; 5] = Default::default();
        for c in self.layout.signature().iter() {
            let base = self.layout.offset(c).unwrap();
            let len = table_len(self.size, c);
            tables[c.index()] = Some(cells[base..base + len].iter().map(|v| v.unwrap()).collect());
        }
        Matrix::from_tables(self.size, self.designated as usize, tables)
            .expect("complete cells form a matrix")
    }
}

struct Level {
    trail: usize,
    target_pending: usize,
    target_false: usize,
}

pub(crate) struct Worker<'a> {
    prep: &'a Prepared,
    control: &'a Control,
    cells: Vec<Option<Value>>,
    watches: Vec<Vec<u32>>,
    trail: Vec<u32>,
    levels: Vec<Level>,
    target_pending: usize,
    target_false: usize,
    stack: Vec<Value>,
    pub(crate) stats: SearchStats,
}

impl<'a> Worker<'a> {
    pub(crate) fn new(prep: &'a Prepared, control: &'a Control) -> Self {
        let root = prep.root.clone().expect("worker needs a feasible root");
        Worker {
            prep,
            control,
            cells: root.cells,
            watches: root.watches,
            trail: Vec::new(),
            levels: Vec::new(),
            target_pending: root.target_pending,
            target_false: root.target_false,
            stack: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn assign(&mut self, cell: usize, value: Value) -> Result<(), PruneCause> {
        self.levels.push(Level {
            trail: self.trail.len(),
            target_pending: self.target_pending,
            target_false: self.target_false,
        });
        self.cells[cell] = Some(value);
        if self.prep.naive {
            return Ok(());
        }
        let d = self.prep.designated;
        let watching = std::mem::take(&mut self.watches[cell]);
        let mut result = Ok(());
        for &id in &watching {
            let inst = &self.prep.instances[id as usize];
            match self.prep.eval(inst, &self.cells, &mut self.stack) {
                Ok(v) => match inst.kind {
                    Kind::Kept => {
                        if v >= d {
                            result = Err(PruneCause::KeptAxiom);
                            break;
                        }
                    }
                    Kind::Target => {
                        self.target_pending -= 1;
                        self.target_false += usize::from(v >= d);
                    }
                },
                Err(next) => {
                    self.watches[next].push(id);
                    self.trail.push(next as u32);
                }
            }
        }
        self.watches[cell] = watching;
        if result.is_ok()
            && self.prep.prune_valid_target
            && self.target_pending == 0
            && self.target_false == 0
        {
            result = Err(PruneCause::TargetValid);
        }
        if result.is_err() {
            self.unassign(cell);
        }
        result
    }

    fn unassign(&mut self, cell: usize) {
        let level = self.levels.pop().expect("unassign matches an assign");
        while self.trail.len() > level.trail {
            let c = self.trail.pop().unwrap();
            self.watches[c as usize].pop();
        }
        self.target_pending = level.target_pending;
        self.target_false = level.target_false;
        self.cells[cell] = None;
    }

    /// Some non-trivial symmetry already maps the matrix to a
    /// lexicographically smaller one, whatever the remaining cells hold.
    fn lex_leader_violated(&self) -> bool {
        self.prep.symmetries.iter().any(|sym| {
            for (j, &src) in sym.source.iter().enumerate() {
                let (Some(a), Some(b)) = (self.cells[j], self.cells[src as usize]) else {
                    return false;
                };
                let b = sym.map[b as usize];
                if b != a {
                    return b < a;
                }
            }
            false
        })
    }

    /// Assigns `value` to the cell at `depth`, counting a node. Leaves the
    /// value in place on success.
    fn try_value(&mut self, depth: usize, value: Value) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes.is_multiple_of(1024) {
            self.control.check_deadline();
        }
        let cell = self.prep.order[depth];
        if let Err(cause) = self.assign(cell, value) {
            self.stats.record(cause);
            return false;
        }
        if self.prep.naive {
            let pm = PartialMatrix::from_cells(
                self.prep.designated as usize,
                self.prep.layout.clone(),
                self.cells.clone(),
            );
            if let Propagation::Contradiction(_) = propagate(&pm, &self.prep.problem) {
                self.stats.record(PruneCause::KeptAxiom);
                self.unassign(cell);
                return false;
            }
        }
        if self.prep.canonical_only && self.lex_leader_violated() {
            self.stats.record(PruneCause::Symmetry);
            self.unassign(cell);
            return false;
        }
        true
    }

    fn complete(&mut self, sink: &mut dyn FnMut(Solution) -> Flow) -> Flow {
        if !self.prep.naive && self.target_false == 0 {
            self.stats.record(PruneCause::TargetValid);
            return Flow::Continue;
        }
        let m = self.prep.matrix_from(&self.cells);
        if self.prep.canonical_only && canonical_form(&m) != m {
            self.stats.non_canonical_rejections += 1;
            return Flow::Continue;
        }
        let verdict =
            check_solution(&self.prep.problem, &m).expect("search matrices match the problem");
        if !verdict.normality_ok || verdict.failures().next().is_some() {
            self.stats.verification_failures += 1;
            return Flow::Continue;
        }
        let Some(witness) = verdict.falsification_witness else {
            self.stats.record(PruneCause::TargetValid);
            return Flow::Continue;
        };
        self.stats.solutions += 1;
        sink(Solution { matrix: m, witness })
    }

    fn dfs(&mut self, depth: usize, sink: &mut dyn FnMut(Solution) -> Flow) -> Flow {
        if self.control.cancelled() {
            return Flow::Stop;
        }
        if depth == self.prep.order.len() {
            return self.complete(sink);
        }
        let cell = self.prep.order[depth];
        for &v in &self.prep.domains[cell] {
            if !self.try_value(depth, v) {
                continue;
            }
            let flow = self.dfs(depth + 1, sink);
            self.unassign(cell);
            if let Flow::Stop = flow {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    fn replay(&mut self, prefix: &[Value]) {
        for (depth, &v) in prefix.iter().enumerate() {
            let ok = self.assign(self.prep.order[depth], v);
            debug_assert!(ok.is_ok(), "job prefixes are consistent");
        }
    }

    fn rewind(&mut self, prefix: &[Value]) {
        for depth in (0..prefix.len()).rev() {
            self.unassign(self.prep.order[depth]);
        }
    }

    /// Splits the tree into consistent prefixes, one level at a time, until
    /// there are at least `target` of them or the cells run out.
    pub(crate) fn split(&mut self, target: usize) -> Vec<Vec<Value>> {
        let mut prefixes: Vec<Vec<Value>> = vec![Vec::new()];
        let mut depth = 0;
        while prefixes.len() < target && depth < self.prep.order.len() {
            let mut next = Vec::new();
            for prefix in &prefixes {
                self.replay(prefix);
                let cell = self.prep.order[depth];
                for &v in &self.prep.domains[cell] {
                    if self.try_value(depth, v) {
                        let mut p = prefix.clone();
                        p.push(v);
                        next.push(p);
                        self.unassign(cell);
                    }
                }
                self.rewind(prefix);
            }
            prefixes = next;
            depth += 1;
        }
        prefixes
    }

    pub(crate) fn run_job(&mut self, prefix: &[Value], sink: &mut dyn FnMut(Solution) -> Flow) {
        self.replay(prefix);
        self.dfs(prefix.len(), sink);
        self.rewind(prefix);
    }
}
