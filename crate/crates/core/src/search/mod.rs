//! Backtracking search for independence matrices.
//!
//! Cells are assigned in a fixed static order with values tried ascending.
//! After every assignment the kept axioms are checked on the instances that
//! the new cell unblocks; implication cells in a designated row and a
//! non-designated column are restricted to non-designated values up front,
//! which enforces normality. Every emitted matrix is re-verified with
//! [`check_solution`](crate::problems::check_solution) before it leaves the
//! engine.
//!
//! The tree is split into independent jobs at the first few free cells.
//! Jobs run on a pool of worker threads; in deterministic mode their
//! solutions are buffered and released in sequential depth-first order.

mod engine;
mod oracle;
mod partial;

pub use oracle::{exhaustive_oracle, ORACLE_SPACE_LIMIT};
pub use partial::{
    eval_partial, propagate, CellRef, Contradiction, Layout, PartialMatrix, PartialValue,
    Propagation,
};

use std::fmt;
use std::sync::atomic::Ordering;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::formula::Connective;
use crate::matrix::{table_len, Assignment, Matrix, Value};
use crate::problems::{IndependenceProblem, ProblemError};

use engine::{Control, Flow, Prepared, Worker};

/// Number of jobs the tree is split into before workers start. Fixed so
/// that node counts and emission order do not depend on the worker count.
pub const TARGET_JOBS: usize = 64;

/// Which cell is assigned next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CellOrder {
    /// Implication row-major, then and, or, not, falsum.
    #[default]
    TableOrder,
    /// The same order backwards.
    Reversed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PropagationMode {
    /// Watched instances, re-evaluated only when their blocking cell is set.
    #[default]
    Incremental,
    /// Full [`propagate`] rescan after every assignment.
    Naive,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Stop after this many solutions; 0 means no limit.
    pub limit: usize,
    /// Emit only matrices equal to their canonical form.
    pub canonical_only: bool,
    /// Emit in sequential depth-first order regardless of `workers`.
    pub deterministic: bool,
    pub workers: usize,
    /// Whole tables held fixed during the search.
    pub fixed: Vec<(Connective, Vec<Value>)>,
    pub budget: Option<Duration>,
    pub cell_order: CellOrder,
    pub propagation: PropagationMode,
    /// Prune as soon as every target instance is known to be designated.
    pub prune_valid_target: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            limit: 0,
            canonical_only: false,
            deterministic: true,
            workers: 1,
            fixed: Vec::new(),
            budget: None,
            cell_order: CellOrder::TableOrder,
            propagation: PropagationMode::Incremental,
            prune_valid_target: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("cannot fix {0}: it is outside the problem's signature")]
    FixedOutsideSignature(Connective),
    #[error("{0} is fixed twice")]
    FixedTwice(Connective),
    #[error("fixed {connective} table has {found} cells, but size {size} needs {expected}")]
    FixedSizeMismatch {
        connective: Connective,
        size: usize,
        expected: usize,
        found: usize,
    },
    #[error("fixed {connective} table holds value {value}, out of range for size {size}")]
    FixedValueOutOfRange {
        connective: Connective,
        value: Value,
        size: usize,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(
        "search space of {size}^{cells} matrices exceeds the oracle limit of {ORACLE_SPACE_LIMIT}"
    )]
    OracleTooLarge { size: usize, cells: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub matrix: Matrix,
    /// First falsifying assignment of the target, with its value.
    pub witness: (Assignment, Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Exhausted,
    LimitReached,
    BudgetExceeded,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Exhausted => "exhausted",
            SearchStatus::LimitReached => "limit-reached",
            SearchStatus::BudgetExceeded => "budget-exceeded",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneCause {
    Normality,
    KeptAxiom,
    TargetValid,
    Symmetry,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PruneCounts {
    pub normality: u64,
    pub kept_axiom: u64,
    pub target_valid: u64,
    pub symmetry: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub configurations: u64,
    pub jobs: u64,
    pub nodes: u64,
    pub prunes: PruneCounts,
    /// Implication cells whose domain normality restricts before search.
    pub normality_restricted_cells: u64,
    pub non_canonical_rejections: u64,
    pub verification_failures: u64,
    pub solutions: u64,
    pub wall_time_secs: f64,
}

impl SearchStats {
    pub fn record(&mut self, cause: PruneCause) {
        let slot = match cause {
            PruneCause::Normality => &mut self.prunes.normality,
            PruneCause::KeptAxiom => &mut self.prunes.kept_axiom,
            PruneCause::TargetValid => &mut self.prunes.target_valid,
            PruneCause::Symmetry => &mut self.prunes.symmetry,
        };
        *slot += 1;
    }

    fn merge(&mut self, other: &SearchStats) {
        self.configurations += other.configurations;
        self.jobs += other.jobs;
        self.nodes += other.nodes;
        self.prunes.normality += other.prunes.normality;
        self.prunes.kept_axiom += other.prunes.kept_axiom;
        self.prunes.target_valid += other.prunes.target_valid;
        self.prunes.symmetry += other.prunes.symmetry;
        self.normality_restricted_cells += other.normality_restricted_cells;
        self.non_canonical_rejections += other.non_canonical_rejections;
        self.verification_failures += other.verification_failures;
        self.solutions += other.solutions;
    }
}

/// Terminal status and counters of a search whose solutions were streamed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub status: SearchStatus,
    pub emitted: usize,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub solutions: Vec<Solution>,
    pub status: SearchStatus,
    pub stats: SearchStats,
}

fn validate(problem: &IndependenceProblem, cfg: &SearchConfig) -> Result<(), SearchError> {
    if cfg.workers == 0 {
        return Err(SearchError::NoWorkers);
    }
    for (i, (c, table)) in cfg.fixed.iter().enumerate() {
        if !problem.signature().contains(*c) {
            return Err(SearchError::FixedOutsideSignature(*c));
        }
        if cfg.fixed[..i].iter().any(|(other, _)| other == c) {
            return Err(SearchError::FixedTwice(*c));
        }
        for (size, _) in problem.configurations() {
            let expected = table_len(size, *c);
            if table.len() != expected {
                return Err(SearchError::FixedSizeMismatch {
                    connective: *c,
                    size,
                    expected,
                    found: table.len(),
                });
            }
            if let Some(&value) = table.iter().find(|&&v| v as usize >= size) {
                return Err(SearchError::FixedValueOutOfRange {
                    connective: *c,
                    value,
                    size,
                });
            }
        }
    }
    Ok(())
}

struct Emitter<'f> {
    sink: &'f mut (dyn FnMut(&Solution) + Send),
    limit: usize,
}

impl Emitter<'_> {
    fn emit(&mut self, control: &Control, solution: &Solution) -> Flow {
        let emitted = control.emitted.load(Ordering::Relaxed);
        if self.limit > 0 && emitted >= self.limit {
            return Flow::Stop;
        }
        (self.sink)(solution);
        control.emitted.store(emitted + 1, Ordering::Relaxed);
        if self.limit > 0 && emitted + 1 >= self.limit {
            control.limit_hit.store(true, Ordering::Relaxed);
            control.cancel.store(true, Ordering::Relaxed);
            return Flow::Stop;
        }
        Flow::Continue
    }
}

struct Ordered {
    results: Vec<Option<Vec<Solution>>>,
    cursor: usize,
}

impl Ordered {
    fn flush(&mut self, emitter: &mut Emitter<'_>, control: &Control) {
        while let Some(Some(batch)) = self.results.get_mut(self.cursor) {
            for s in std::mem::take(batch) {
                if let Flow::Stop = emitter.emit(control, &s) {
                    return;
                }
            }
            self.cursor += 1;
        }
    }
}

fn run_configuration(
    prep: &Prepared,
    cfg: &SearchConfig,
    control: &Control,
    emitter: &Mutex<Emitter<'_>>,
    stats: &mut SearchStats,
) {
    let prefixes = {
        let mut splitter = Worker::new(prep, control);
        let prefixes = splitter.split(TARGET_JOBS);
        stats.merge(&splitter.stats);
        prefixes
    };
    stats.jobs += prefixes.len() as u64;
    if prefixes.is_empty() {
        return;
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let ordered = Mutex::new(Ordered {
        results: vec![None; prefixes.len()],
        cursor: 0,
    });
    let totals = Mutex::new(SearchStats::default());
    let limit = cfg.limit;
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.min(prefixes.len()) {
            scope.spawn(|| {
                let mut worker = Worker::new(prep, control);
                loop {
                    let j = next.fetch_add(1, Ordering::Relaxed);
                    if j >= prefixes.len() || control.cancelled() {
                        break;
                    }
                    if cfg.deterministic {
                        let mut found = Vec::new();
                        worker.run_job(&prefixes[j], &mut |s| {
                            found.push(s);
                            if limit > 0 && found.len() >= limit {
                                Flow::Stop
                            } else {
                                Flow::Continue
                            }
                        });
                        let mut ordered = ordered.lock().unwrap();
                        ordered.results[j] = Some(found);
                        ordered.flush(&mut emitter.lock().unwrap(), control);
                    } else {
                        worker.run_job(&prefixes[j], &mut |s| {
                            emitter.lock().unwrap().emit(control, &s)
                        });
                    }
                }
                totals.lock().unwrap().merge(&worker.stats);
            });
        }
    });
    stats.merge(&totals.into_inner().unwrap());
    // After a budget stop, release whatever the unfinished jobs found.
    let mut ordered = ordered.into_inner().unwrap();
    let mut emitter = emitter.lock().unwrap();
    for batch in ordered.results.iter_mut().skip(ordered.cursor).flatten() {
        for s in std::mem::take(batch) {
            if let Flow::Stop = emitter.emit(control, &s) {
                return;
            }
        }
    }
}

/// Streams every solution to `on_solution` as it is released.
pub fn search_with<F>(
    problem: &IndependenceProblem,
    cfg: &SearchConfig,
    mut on_solution: F,
) -> Result<SearchReport, SearchError>
where
    F: FnMut(&Solution) + Send,
{
    validate(problem, cfg)?;
    let started = Instant::now();
    let control = Control::new(cfg.budget.map(|b| started + b));
    let emitter = Mutex::new(Emitter {
        sink: &mut on_solution,
        limit: cfg.limit,
    });
    let mut stats = SearchStats::default();
    for (size, designated) in problem.configurations() {
        control.check_deadline();
        if control.cancelled() {
            break;
        }
        stats.configurations += 1;
        let prep = Prepared::new(problem.at(size, designated)?, cfg, &mut stats);
        if prep.is_feasible() {
            run_configuration(&prep, cfg, &control, &emitter, &mut stats);
        }
    }
    stats.wall_time_secs = started.elapsed().as_secs_f64();
    let status = if control.limit_hit.load(Ordering::Relaxed) {
        SearchStatus::LimitReached
    } else if control.budget_hit.load(Ordering::Relaxed) {
        SearchStatus::BudgetExceeded
    } else {
        SearchStatus::Exhausted
    };
    Ok(SearchReport {
        status,
        emitted: control.emitted.load(Ordering::Relaxed),
        stats,
    })
}

pub fn search(
    problem: &IndependenceProblem,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let mut solutions = Vec::new();
    let report = search_with(problem, cfg, |s| solutions.push(s.clone()))?;
    Ok(SearchOutcome {
        solutions,
        status: report.status,
        stats: report.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::canonical_form;
    use crate::problems::{builtin_matrix, builtin_problem, check_solution};

    fn meyer_parks(size: usize, d: usize) -> IndependenceProblem {
        builtin_problem("meyer-parks-B'")
            .unwrap()
            .at(size, d)
            .unwrap()
    }

    #[test]
    fn finds_m3_in_canonical_mode() {
        let cfg = SearchConfig {
            canonical_only: true,
            ..SearchConfig::default()
        };
        let out = search(&meyer_parks(3, 2), &cfg).unwrap();
        assert_eq!(out.status, SearchStatus::Exhausted);
        let m3 = canonical_form(&builtin_matrix("M3").unwrap());
        assert!(out.solutions.iter().any(|s| s.matrix == m3));
        for s in &out.solutions {
            assert_eq!(canonical_form(&s.matrix), s.matrix);
        }
        assert_eq!(out.stats.verification_failures, 0);
    }

    #[test]
    fn emitted_solutions_pass_external_check() {
        let p = meyer_parks(3, 2);
        let out = search(&p, &SearchConfig::default()).unwrap();
        assert!(!out.solutions.is_empty());
        for s in &out.solutions {
            let v = check_solution(&p, &s.matrix).unwrap();
            assert!(v.pass());
            assert_eq!(v.falsification_witness.as_ref(), Some(&s.witness));
        }
    }

    #[test]
    fn limit_stops_early() {
        let cfg = SearchConfig {
            limit: 1,
            ..SearchConfig::default()
        };
        let out = search(&meyer_parks(3, 2), &cfg).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.status, SearchStatus::LimitReached);
    }

    #[test]
    fn deterministic_order_is_independent_of_workers() {
        let p = meyer_parks(3, 2);
        let run = |workers| {
            let cfg = SearchConfig {
                workers,
                ..SearchConfig::default()
            };
            search(&p, &cfg).unwrap()
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.solutions, four.solutions);
        assert_eq!(one.stats.nodes, four.stats.nodes);
    }

    #[test]
    fn deterministic_limit_matches_sequential_prefix() {
        let p = meyer_parks(3, 2);
        let all = search(&p, &SearchConfig::default()).unwrap().solutions;
        let cfg = SearchConfig {
            workers: 4,
            limit: 3,
            ..SearchConfig::default()
        };
        let first = search(&p, &cfg).unwrap();
        assert_eq!(first.solutions, all[..3]);
    }

    #[test]
    fn zero_budget_reports_budget_exceeded() {
        let p = builtin_problem("robinson-S")
            .unwrap()
            .with_sizes(4..=4)
            .unwrap();
        let cfg = SearchConfig {
            budget: Some(Duration::ZERO),
            ..SearchConfig::default()
        };
        let out = search(&p, &cfg).unwrap();
        assert_eq!(out.status, SearchStatus::BudgetExceeded);
    }

    #[test]
    fn config_errors() {
        let p = meyer_parks(3, 2);
        let bad = |cfg: SearchConfig| search(&p, &cfg).unwrap_err();
        assert_eq!(
            bad(SearchConfig {
                workers: 0,
                ..SearchConfig::default()
            }),
            SearchError::NoWorkers
        );
        assert_eq!(
            bad(SearchConfig {
                fixed: vec![(Connective::And, vec![0; 9])],
                ..SearchConfig::default()
            }),
            SearchError::FixedOutsideSignature(Connective::And)
        );
        assert!(matches!(
            bad(SearchConfig {
                fixed: vec![(Connective::Imp, vec![0; 4])],
                ..SearchConfig::default()
            }),
            SearchError::FixedSizeMismatch { .. }
        ));
        assert!(matches!(
            bad(SearchConfig {
                fixed: vec![(Connective::Imp, vec![3; 9])],
                ..SearchConfig::default()
            }),
            SearchError::FixedValueOutOfRange { .. }
        ));
    }

    #[test]
    fn naive_and_incremental_agree() {
        for (n, d) in [(2, 1), (3, 1), (3, 2)] {
            let p = meyer_parks(n, d);
            let incremental = search(&p, &SearchConfig::default()).unwrap();
            let naive = search(
                &p,
                &SearchConfig {
                    propagation: PropagationMode::Naive,
                    ..SearchConfig::default()
                },
            )
            .unwrap();
            assert_eq!(incremental.solutions, naive.solutions, "size {n}, d {d}");
        }
    }

    #[test]
    fn target_pruning_does_not_change_results() {
        let p = meyer_parks(3, 2);
        let with = search(&p, &SearchConfig::default()).unwrap();
        let without = search(
            &p,
            &SearchConfig {
                prune_valid_target: false,
                ..SearchConfig::default()
            },
        )
        .unwrap();
        assert_eq!(with.solutions, without.solutions);
    }

    #[test]
    fn cell_order_does_not_change_solution_set() {
        let p = meyer_parks(3, 2);
        let mut forward = search(&p, &SearchConfig::default()).unwrap().solutions;
        let mut backward = search(
            &p,
            &SearchConfig {
                cell_order: CellOrder::Reversed,
                ..SearchConfig::default()
            },
        )
        .unwrap()
        .solutions;
        forward.sort_by(|a, b| a.matrix.cmp(&b.matrix));
        backward.sort_by(|a, b| a.matrix.cmp(&b.matrix));
        assert_eq!(forward, backward);
    }
}
