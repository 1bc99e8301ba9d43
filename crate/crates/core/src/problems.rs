//! Independence problems and the built-in fixtures.
//!
//! A problem asks for a normal matrix that validates every kept axiom while
//! falsifying the target. Problem files are line oriented, `#` starts a
//! comment:
//!
//! ```text
//! name: meyer-parks-B'
//! signature: imp
//! sizes: 3..3
//! designated: 2
//! keep W: (p -> p -> q) -> p -> q
//! keep pon: p -> (p -> q) -> q
//! falsify B': (p -> q) -> (q -> r) -> p -> r
//! ```
//!
//! `designated:` takes a count, `any` (every count from 1 to size − 1), or a
//! per-size list such as `4=3, 5=1`. `signature:` defaults to the connectives
//! used by the axioms.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{self, Connective, Formula, ParseError, Signature};
use crate::matrix::{is_normal, validates, Assignment, Matrix, Validity, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NamedFormula {
    pub name: String,
    pub formula: Formula,
}

impl NamedFormula {
    pub fn new(name: impl Into<String>, formula: Formula) -> Self {
        NamedFormula {
            name: name.into(),
            formula,
        }
    }

    /// Panics on malformed text; meant for literals.
    pub fn parse(name: &str, text: &str) -> Self {
        NamedFormula::new(name, formula::parse(text).expect("valid formula literal"))
    }
}

/// Which designated counts a problem admits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Designation {
    Count(usize),
    PerSize(BTreeMap<usize, usize>),
    /// Every count `1..size`.
    Any,
}

impl Designation {
    /// Admissible designated counts at `size`, ascending.
    pub fn counts_for(&self, size: usize) -> Vec<usize> {
        match self {
            Designation::Count(d) => vec![*d],
            Designation::PerSize(map) => map.get(&size).copied().into_iter().collect(),
            Designation::Any => (1..size).collect(),
        }
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Designation::Count(d) => write!(f, "{d}"),
            Designation::Any => f.write_str("any"),
            Designation::PerSize(map) => {
                let parts: Vec<String> = map.iter().map(|(n, d)| format!("{n}={d}")).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

impl FromStr for Designation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "any" {
            return Ok(Designation::Any);
        }
        if let Ok(d) = s.parse::<usize>() {
            return Ok(Designation::Count(d));
        }
        let mut map = BTreeMap::new();
        for part in s.split(',').map(str::trim) {
            let (n, d) = part
                .split_once('=')
                .ok_or_else(|| format!("malformed designation `{part}`"))?;
            let n = n
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("bad size `{n}`"))?;
            let d = d
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("bad count `{d}`"))?;
            if map.insert(n, d).is_some() {
                return Err(format!("size {n} listed twice"));
            }
        }
        Ok(Designation::PerSize(map))
    }
}

/// Parses `5`, `2..4` or `2..=4`.
pub fn parse_size_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let s = s.trim();
    let bad = || format!("malformed size range `{s}`");
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let lo = lo.trim().parse::<usize>().map_err(|_| bad())?;
    let hi = hi.trim().parse::<usize>().map_err(|_| bad())?;
    Ok(lo..=hi)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("empty size range {0}..{1}")]
    EmptySizes(usize, usize),
    #[error("designated count {designated} leaves no non-designated value at size {size}")]
    NoUndesignatedValue { designated: usize, size: usize },
    #[error("designated count must be positive")]
    ZeroDesignated,
    #[error("no designated count given for size {0}")]
    MissingDesignationForSize(usize),
    #[error("axiom `{axiom}` uses {connective}, which is outside the signature")]
    OutsideSignature {
        axiom: String,
        connective: Connective,
    },
    #[error("unknown built-in problem `{0}`")]
    UnknownBuiltin(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: ParseError },
    #[error("line {line}: unknown connective `{name}` in signature")]
    UnknownConnective { line: usize, name: String },
    #[error("missing `{0}` line")]
    MissingField(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceProblem {
    name: Option<String>,
    signature: Signature,
    sizes: RangeInclusive<usize>,
    designation: Designation,
    kept: Vec<NamedFormula>,
    target: NamedFormula,
}

impl IndependenceProblem {
    pub fn new(
        name: Option<String>,
        signature: Signature,
        sizes: RangeInclusive<usize>,
        designation: Designation,
        kept: Vec<NamedFormula>,
        target: NamedFormula,
    ) -> Result<Self, ProblemError> {
        for axiom in kept.iter().chain(std::iter::once(&target)) {
            if let Some(c) = axiom
                .formula
                .signature()
                .iter()
                .find(|&c| !signature.contains(c))
            {
                return Err(ProblemError::OutsideSignature {
                    axiom: axiom.name.clone(),
                    connective: c,
                });
            }
        }
        let p = IndependenceProblem {
            name,
            signature,
            sizes,
            designation,
            kept,
            target,
        };
        p.check_designation()?;
        Ok(p)
    }

    fn check_designation(&self) -> Result<(), ProblemError> {
        let (lo, hi) = (*self.sizes.start(), *self.sizes.end());
        if lo > hi || lo == 0 {
            return Err(ProblemError::EmptySizes(lo, hi));
        }
        for size in self.sizes.clone() {
            let counts = self.designation.counts_for(size);
            if counts.is_empty() {
                return match self.designation {
                    Designation::Any => Err(ProblemError::NoUndesignatedValue {
                        designated: 1,
                        size,
                    }),
                    _ => Err(ProblemError::MissingDesignationForSize(size)),
                };
            }
            for d in counts {
                if d == 0 {
                    return Err(ProblemError::ZeroDesignated);
                }
                if d >= size {
                    return Err(ProblemError::NoUndesignatedValue {
                        designated: d,
                        size,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn sizes(&self) -> RangeInclusive<usize> {
        self.sizes.clone()
    }

    pub fn designation(&self) -> &Designation {
        &self.designation
    }

    pub fn kept(&self) -> &[NamedFormula] {
        &self.kept
    }

    pub fn target(&self) -> &NamedFormula {
        &self.target
    }

    /// Every `(size, designated)` pair the problem admits, sizes ascending.
    pub fn configurations(&self) -> Vec<(usize, usize)> {
        self.sizes
            .clone()
            .flat_map(|n| {
                self.designation
                    .counts_for(n)
                    .into_iter()
                    .map(move |d| (n, d))
            })
            .collect()
    }

    pub fn with_sizes(&self, sizes: RangeInclusive<usize>) -> Result<Self, ProblemError> {
        let p = IndependenceProblem {
            sizes,
            ..self.clone()
        };
        p.check_designation()?;
        Ok(p)
    }

    pub fn with_designation(&self, designation: Designation) -> Result<Self, ProblemError> {
        let p = IndependenceProblem {
            designation,
            ..self.clone()
        };
        p.check_designation()?;
        Ok(p)
    }

    /// Replaces sizes and designation together, validating only the result.
    pub fn with_space(
        &self,
        sizes: RangeInclusive<usize>,
        designation: Designation,
    ) -> Result<Self, ProblemError> {
        let p = IndependenceProblem {
            sizes,
            designation,
            ..self.clone()
        };
        p.check_designation()?;
        Ok(p)
    }

    /// The same axioms restricted to a single size and designated count.
    pub fn at(&self, size: usize, designated: usize) -> Result<Self, ProblemError> {
        self.with_space(size..=size, Designation::Count(designated))
    }
}

pub fn parse_problem(text: &str) -> Result<IndependenceProblem, ProblemError> {
    let mut name = None;
    let mut signature: Option<Signature> = None;
    let mut sizes = None;
    let mut designation = None;
    let mut kept = Vec::new();
    let mut target: Option<NamedFormula> = None;
    let syntax = |line, message: String| ProblemError::Syntax { line, message };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("expected `key: value`, found `{body}`")))?;
        let rest = rest.trim();
        let mut words = head.split_whitespace();
        let key = words.next().unwrap_or("");
        let label = words.next();
        if words.next().is_some() {
            return Err(syntax(line, format!("malformed key `{head}`")));
        }
        let duplicate = |what: &str| syntax(line, format!("`{what}` given twice"));
        match (key, label) {
            ("name", None) => {
                if name.replace(rest.to_string()).is_some() {
                    return Err(duplicate("name"));
                }
            }
            ("signature", None) => {
                let mut sig = Signature::implicational();
                for word in rest.split_whitespace() {
                    let c = Connective::from_keyword(word).ok_or_else(|| {
                        ProblemError::UnknownConnective {
                            line,
                            name: word.to_string(),
                        }
                    })?;
                    sig = sig.with(c);
                }
                if signature.replace(sig).is_some() {
                    return Err(duplicate("signature"));
                }
            }
            ("sizes", None) => {
                let range = parse_size_range(rest).map_err(|m| syntax(line, m))?;
                if sizes.replace(range).is_some() {
                    return Err(duplicate("sizes"));
                }
            }
            ("designated", None) => {
                let d = rest.parse::<Designation>().map_err(|m| syntax(line, m))?;
                if designation.replace(d).is_some() {
                    return Err(duplicate("designated"));
                }
            }
            ("keep" | "falsify", Some(label)) => {
                let formula = formula::parse(rest)
                    .map_err(|source| ProblemError::Formula { line, source })?;
                let axiom = NamedFormula::new(label, formula);
                if key == "keep" {
                    kept.push(axiom);
                } else if target.replace(axiom).is_some() {
                    return Err(syntax(line, "exactly one `falsify` line is allowed".into()));
                }
            }
            _ => return Err(syntax(line, format!("unknown key `{head}`"))),
        }
    }

    let target = target.ok_or(ProblemError::MissingField("falsify"))?;
    let signature = signature.unwrap_or_else(|| {
        kept.iter()
            .chain(std::iter::once(&target))
            .fold(Signature::implicational(), |s, a| {
                Signature::from_connectives(s.iter().chain(a.formula.signature().iter()))
            })
    });
    IndependenceProblem::new(
        name,
        signature,
        sizes.ok_or(ProblemError::MissingField("sizes"))?,
        designation.ok_or(ProblemError::MissingField("designated"))?,
        kept,
        target,
    )
}

impl FromStr for IndependenceProblem {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_problem(s)
    }
}

pub fn render_problem(p: &IndependenceProblem) -> String {
    let mut out = String::new();
    if let Some(name) = p.name() {
        let _ = writeln!(out, "name: {name}");
    }
    let _ = writeln!(out, "signature: {}", p.signature);
    let _ = writeln!(out, "sizes: {}..{}", p.sizes.start(), p.sizes.end());
    let _ = writeln!(out, "designated: {}", p.designation);
    for axiom in &p.kept {
        let _ = writeln!(out, "keep {}: {}", axiom.name, axiom.formula);
    }
    let _ = writeln!(out, "falsify {}: {}", p.target.name, p.target.formula);
    out
}

pub const BUILTIN_PROBLEMS: [&str; 3] = ["robinson-S", "robinson-K", "meyer-parks-B'"];
pub const BUILTIN_MATRICES: [&str; 4] = ["M5", "M4", "M3", "B2"];

fn robinson_axioms() -> Vec<NamedFormula> {
    [
        ("K", "p -> q -> p"),
        ("S", "(p -> q -> r) -> (p -> q) -> p -> r"),
        ("peirce", "((p -> q) -> p) -> p"),
        ("andelimr", "p & q -> p"),
        ("andeliml", "p & q -> q"),
        ("andintro", "p -> q -> p & q"),
        ("orintror", "p -> p | q"),
        ("orintrol", "p -> q | p"),
        ("orelim", "p | q -> (p -> r) -> (q -> r) -> r"),
        ("orelim-comm", "p | q -> (q -> r) -> (p -> r) -> r"),
        ("contrap", "(p -> ~q) -> q -> ~p"),
        ("notelim", "~p -> p -> q"),
        ("falseelim", "F -> p"),
    ]
    .into_iter()
    .map(|(name, text)| NamedFormula::parse(name, text))
    .collect()
}

fn robinson_problem(target: &str, size: usize, designated: usize) -> IndependenceProblem {
    let (target, kept): (Vec<_>, Vec<_>) = robinson_axioms()
        .into_iter()
        .partition(|a| a.name == target);
    IndependenceProblem::new(
        Some(format!("robinson-{}", target[0].name)),
        Signature::full(),
        size..=size,
        Designation::Count(designated),
        kept,
        target.into_iter().next().unwrap(),
    )
    .expect("built-in problem is well formed")
}

/// `robinson-S`, `robinson-K` or `meyer-parks-B'` (also spelled
/// `meyer-parks-Bprime`).
pub fn builtin_problem(name: &str) -> Result<IndependenceProblem, ProblemError> {
    match name {
        "robinson-S" => Ok(robinson_problem("S", 5, 1)),
        "robinson-K" => Ok(robinson_problem("K", 4, 3)),
        "meyer-parks-B'" | "meyer-parks-Bprime" => Ok(IndependenceProblem::new(
            Some("meyer-parks-B'".into()),
            Signature::implicational(),
            3..=3,
            Designation::Count(2),
            vec![
                NamedFormula::parse("W", "(p -> p -> q) -> p -> q"),
                NamedFormula::parse("pon", "p -> (p -> q) -> q"),
                NamedFormula::parse(
                    "X",
                    "((((p -> q) -> q) -> p) -> r) -> ((((q -> p) -> p) -> q) -> r) -> r",
                ),
            ],
            NamedFormula::parse("B'", "(p -> q) -> (q -> r) -> p -> r"),
        )
        .expect("built-in problem is well formed")),
        other => Err(ProblemError::UnknownBuiltin(other.to_string())),
    }
}

/// All Robinson axioms, including both orientations of `orelim`.
pub fn robinson_axiom_set() -> Vec<NamedFormula> {
    robinson_axioms()
}

fn matrix(size: usize, designated: usize, tables: [&[&[Value]]; 5]) -> Matrix {
    let mut out: [Option<Vec<Value>>; 5] = Default::default();
    for (slot, rows) in out.iter_mut().zip(tables) {
        if !rows.is_empty() {
            *slot = Some(rows.concat());
        }
    }
    Matrix::from_tables(size, designated, out).expect("built-in matrix is well formed")
}

/// `M5`, `M4`, `M3` (the reference tables) or `B2` (classical, 0 = true).
pub fn builtin_matrix(name: &str) -> Option<Matrix> {
    let m = match name {
        "M5" => matrix(
            5,
            1,
            [
                &[
                    &[0, 1, 1, 1, 1],
                    &[0, 0, 0, 0, 0],
                    &[0, 0, 0, 0, 0],
                    &[0, 0, 4, 0, 4],
                    &[0, 0, 3, 3, 0],
                ],
                &[
                    &[0, 1, 1, 1, 1],
                    &[1, 1, 1, 1, 1],
                    &[1, 1, 1, 1, 1],
                    &[1, 1, 1, 1, 1],
                    &[1, 1, 1, 1, 1],
                ],
                &[
                    &[0, 0, 0, 0, 0],
                    &[0, 1, 1, 1, 1],
                    &[0, 1, 1, 1, 1],
                    &[0, 1, 1, 1, 1],
                    &[0, 1, 1, 1, 1],
                ],
                &[&[2, 0, 0, 1, 1]],
                &[&[1]],
            ],
        ),
        "M4" => matrix(
            4,
            3,
            [
                &[&[0, 0, 2, 3], &[0, 0, 3, 3], &[0, 0, 0, 3], &[0, 0, 0, 0]],
                &[&[0, 0, 0, 3], &[0, 0, 0, 3], &[0, 0, 0, 3], &[3, 3, 3, 3]],
                &[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 3]],
                &[&[3, 3, 3, 0]],
                &[&[3]],
            ],
        ),
        "M3" => matrix(
            3,
            2,
            [&[&[0, 0, 2], &[0, 2, 2], &[0, 0, 0]], &[], &[], &[], &[]],
        ),
        "B2" => matrix(
            2,
            1,
            [
                &[&[0, 1], &[0, 0]],
                &[&[0, 1], &[1, 1]],
                &[&[0, 0], &[0, 1]],
                &[&[1, 0]],
                &[&[1]],
            ],
        ),
        _ => return None,
    };
    Some(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("matrix does not interpret {0}, which the problem uses")]
    SignatureMismatch(Connective),
    #[error("matrix size {size} is outside the problem's sizes {lo}..{hi}")]
    SizeOutOfRange { size: usize, lo: usize, hi: usize },
    #[error("matrix designates {found} values; the problem expects {expected:?} at size {size}")]
    DesignationMismatch {
        found: usize,
        expected: Vec<usize>,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomVerdict {
    pub name: String,
    pub validity: Validity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kept: Vec<AxiomVerdict>,
    pub normality_ok: bool,
    pub falsification_witness: Option<(Assignment, Value)>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.normality_ok
            && self.falsification_witness.is_some()
            && self.failures().next().is_none()
    }

    /// Kept axioms with a countermodel.
    pub fn failures(&self) -> impl Iterator<Item = (&str, &Assignment, Value)> {
        self.kept.iter().filter_map(|a| {
            a.validity
                .countermodel()
                .map(|(assignment, value)| (a.name.as_str(), assignment, value))
        })
    }
}

pub fn check_solution(p: &IndependenceProblem, m: &Matrix) -> Result<Verdict, CheckError> {
    if let Some(c) = p.signature.iter().find(|&c| !m.signature().contains(c)) {
        return Err(CheckError::SignatureMismatch(c));
    }
    if !p.sizes.contains(&m.size()) {
        return Err(CheckError::SizeOutOfRange {
            size: m.size(),
            lo: *p.sizes.start(),
            hi: *p.sizes.end(),
        });
    }
    let expected = p.designation.counts_for(m.size());
    if !expected.contains(&m.designated_count()) {
        return Err(CheckError::DesignationMismatch {
            found: m.designated_count(),
            expected,
            size: m.size(),
        });
    }
    let run = |f: &Formula| validates(m, f).expect("signature was checked");
    let kept = p
        .kept
        .iter()
        .map(|a| AxiomVerdict {
            name: a.name.clone(),
            validity: run(&a.formula),
        })
        .collect();
    let falsification_witness = match run(&p.target.formula) {
        Validity::Valid => None,
        Validity::Countermodel { assignment, value } => Some((assignment, value)),
    };
    Ok(Verdict {
        kept,
        normality_ok: is_normal(m),
        falsification_witness,
    })
}
