//! Matrix text formats.
//!
//! The native format is line oriented; `#` starts a comment:
//!
//! ```text
//! size 3
//! designated 2
//! imp
//! 0 0 2
//! 0 2 2
//! 0 0 0
//! not 2 2 0
//! false 2
//! ```
//!
//! Binary tables are given one row per line after their keyword. Unary and
//! nullary tables may follow the keyword on the same line or on the next.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use super::{table_len, Matrix, Value};
use crate::formula::Connective;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct MatrixFormatError {
    pub line: usize,
    pub kind: FormatErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatErrorKind {
    #[error("missing `size` line")]
    MissingSize,
    #[error("missing `designated` line")]
    MissingDesignated,
    #[error("missing mandatory `imp` block")]
    MissingImp,
    #[error("`{0}` given twice")]
    Duplicate(String),
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("`{0}` is not a number")]
    BadNumber(String),
    #[error("size must be between 1 and {max}, got {0}", max = super::MAX_SIZE)]
    BadSize(usize),
    #[error("designated count must be between 1 and the size {size}, got {designated}")]
    BadDesignated { designated: usize, size: usize },
    #[error("value {value} out of range for size {size}")]
    ValueOutOfRange { value: usize, size: usize },
    #[error("row has {found} entries, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("{connective} block has {found} entries, expected {expected}")]
    BlockLength {
        connective: Connective,
        expected: usize,
        found: usize,
    },
    #[error("`size` must precede the table blocks")]
    SizeAfterBlock,
}

/// Everything a matrix file may contain, before the completeness checks of
/// [`parse_matrix`]. Used to read a single table out of a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixBlocks {
    pub size: usize,
    pub designated: Option<usize>,
    pub tables: [Option<Vec<Value>>; 5],
}

struct Line<'a> {
    number: usize,
    words: Vec<&'a str>,
}

fn significant_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = body.split_whitespace().collect();
            (!words.is_empty()).then_some(Line {
                number: i + 1,
                words,
            })
        })
        .collect()
}

fn number(line: usize, word: &str) -> Result<usize, MatrixFormatError> {
    word.parse::<usize>().map_err(|_| MatrixFormatError {
        line,
        kind: FormatErrorKind::BadNumber(word.to_string()),
    })
}

fn values(line: usize, words: &[&str], size: usize) -> Result<Vec<Value>, MatrixFormatError> {
    words
        .iter()
        .map(|w| {
            let v = number(line, w)?;
            if v >= size {
                return Err(MatrixFormatError {
                    line,
                    kind: FormatErrorKind::ValueOutOfRange { value: v, size },
                });
            }
            Ok(v as Value)
        })
        .collect()
}

fn is_value_line(line: &Line<'_>) -> bool {
    line.words[0].bytes().all(|b| b.is_ascii_digit())
}

pub fn parse_matrix_blocks(text: &str) -> Result<MatrixBlocks, MatrixFormatError> {
    let lines = significant_lines(text);
    let err = |line, kind| MatrixFormatError { line, kind };
    let mut size: Option<usize> = None;
    let mut designated: Option<usize> = None;
    let mut tables: [Option<Vec<Value>>; 5] = Default::default();
    let mut seen_block = false;
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        let keyword = line.words[0];
        i += 1;
        match keyword {
            "size" | "designated" => {
                if line.words.len() != 2 {
                    return Err(err(
                        line.number,
                        FormatErrorKind::RowLength {
                            expected: 1,
                            found: line.words.len() - 1,
                        },
                    ));
                }
                let v = number(line.number, line.words[1])?;
                let slot = if keyword == "size" {
                    if seen_block {
                        return Err(err(line.number, FormatErrorKind::SizeAfterBlock));
                    }
                    if v == 0 || v > super::MAX_SIZE {
                        return Err(err(line.number, FormatErrorKind::BadSize(v)));
                    }
                    &mut size
                } else {
                    &mut designated
                };
                if slot.replace(v).is_some() {
                    return Err(err(line.number, FormatErrorKind::Duplicate(keyword.into())));
                }
            }
            word => {
                let connective = Connective::from_keyword(word).ok_or_else(|| {
                    err(line.number, FormatErrorKind::UnknownKeyword(word.into()))
                })?;
                let n = size.ok_or_else(|| err(line.number, FormatErrorKind::MissingSize))?;
                seen_block = true;
                if tables[connective.index()].is_some() {
                    return Err(err(line.number, FormatErrorKind::Duplicate(word.into())));
                }
                let expected = table_len(n, connective);
                let mut cells = values(line.number, &line.words[1..], n)?;
                if connective.arity() == 2 {
                    if !cells.is_empty() {
                        return Err(err(
                            line.number,
                            FormatErrorKind::RowLength {
                                expected: 0,
                                found: cells.len(),
                            },
                        ));
                    }
                    for _ in 0..n {
                        let Some(row) = lines.get(i).filter(|l| is_value_line(l)) else {
                            return Err(err(
                                lines.get(i).map_or(line.number, |l| l.number),
                                FormatErrorKind::BlockLength {
                                    connective,
                                    expected,
                                    found: cells.len(),
                                },
                            ));
                        };
                        if row.words.len() != n {
                            return Err(err(
                                row.number,
                                FormatErrorKind::RowLength {
                                    expected: n,
                                    found: row.words.len(),
                                },
                            ));
                        }
                        cells.extend(values(row.number, &row.words, n)?);
                        i += 1;
                    }
                } else {
                    while cells.len() < expected {
                        let Some(next) = lines.get(i).filter(|l| is_value_line(l)) else {
                            break;
                        };
                        cells.extend(values(next.number, &next.words, n)?);
                        i += 1;
                    }
                    if cells.len() != expected {
                        return Err(err(
                            line.number,
                            FormatErrorKind::BlockLength {
                                connective,
                                expected,
                                found: cells.len(),
                            },
                        ));
                    }
                }
                tables[connective.index()] = Some(cells);
            }
        }
    }
    let size = size.ok_or_else(|| {
        err(
            lines.last().map_or(1, |l| l.number),
            FormatErrorKind::MissingSize,
        )
    })?;
    Ok(MatrixBlocks {
        size,
        designated,
        tables,
    })
}

pub fn parse_matrix(text: &str) -> Result<Matrix, MatrixFormatError> {
    let last_line = text.lines().count().max(1);
    let blocks = parse_matrix_blocks(text)?;
    let err = |kind| MatrixFormatError {
        line: last_line,
        kind,
    };
    let designated = blocks
        .designated
        .ok_or_else(|| err(FormatErrorKind::MissingDesignated))?;
    if designated == 0 || designated > blocks.size {
        return Err(err(FormatErrorKind::BadDesignated {
            designated,
            size: blocks.size,
        }));
    }
    if blocks.tables[Connective::Imp.index()].is_none() {
        return Err(err(FormatErrorKind::MissingImp));
    }
    Ok(Matrix::from_tables(blocks.size, designated, blocks.tables)
        .expect("blocks were validated while parsing"))
}

impl FromStr for Matrix {
    type Err = MatrixFormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_matrix(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Native,
    Markdown,
    Latex,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "native" => Ok(RenderFormat::Native),
            "markdown" | "md" => Ok(RenderFormat::Markdown),
            "latex" | "tex" => Ok(RenderFormat::Latex),
            other => Err(format!(
                "unknown format `{other}` (expected native, markdown or latex)"
            )),
        }
    }
}

impl fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderFormat::Native => "native",
            RenderFormat::Markdown => "markdown",
            RenderFormat::Latex => "latex",
        })
    }
}

pub fn render_matrix(m: &Matrix, format: RenderFormat) -> String {
    match format {
        RenderFormat::Native => render_native(m),
        RenderFormat::Markdown => render_markdown(m),
        RenderFormat::Latex => render_latex(m),
    }
}

fn joined(values: &[Value], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn render_native(m: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "size {}", m.size());
    let _ = writeln!(out, "designated {}", m.designated_count());
    for c in m.signature().iter() {
        let table = m.table(c).unwrap();
        match c.arity() {
            2 => {
                let _ = writeln!(out, "{c}");
                for row in table.chunks(m.size()) {
                    let _ = writeln!(out, "{}", joined(row, " "));
                }
            }
            _ => {
                let _ = writeln!(out, "{c} {}", joined(table, " "));
            }
        }
    }
    out
}

fn markdown_symbol(c: Connective) -> &'static str {
    match c {
        Connective::Imp => "→",
        Connective::And => "∧",
        Connective::Or => "∨",
        Connective::Not => "¬",
        Connective::False => "⊥",
    }
}

fn render_markdown(m: &Matrix) -> String {
    let n = m.size();
    let designated: Vec<Value> = (0..m.designated_count() as Value).collect();
    let mut out = format!("Designated values: {}\n", joined(&designated, ", "));
    for c in m.signature().iter() {
        let table = m.table(c).unwrap();
        let sym = markdown_symbol(c);
        out.push('\n');
        match c.arity() {
            2 => {
                let header: Vec<String> = (0..n).map(|v| v.to_string()).collect();
                let _ = writeln!(out, "| {sym} | {} |", header.join(" | "));
                let _ = writeln!(out, "|{}", "---|".repeat(n + 1));
                for (x, row) in table.chunks(n).enumerate() {
                    let _ = writeln!(out, "| {x} | {} |", joined(row, " | "));
                }
            }
            1 => {
                let _ = writeln!(out, "|   | {sym} |");
                let _ = writeln!(out, "|---|---|");
                for (x, v) in table.iter().enumerate() {
                    let _ = writeln!(out, "| {x} | {v} |");
                }
            }
            _ => {
                let _ = writeln!(out, "| {sym} |");
                let _ = writeln!(out, "|---|");
                let _ = writeln!(out, "| {} |", table[0]);
            }
        }
    }
    out
}

fn latex_symbol(c: Connective) -> &'static str {
    match c {
        Connective::Imp => "$\\to$",
        Connective::And => "$\\wedge$",
        Connective::Or => "$\\vee$",
        Connective::Not => "$\\neg$",
        Connective::False => "$\\bot$",
    }
}

fn render_latex(m: &Matrix) -> String {
    let n = m.size();
    let mut blocks = Vec::new();
    for c in m.signature().iter() {
        let table = m.table(c).unwrap();
        let sym = latex_symbol(c);
        let mut b = String::new();
        match c.arity() {
            2 => {
                let header: Vec<String> = (0..n).map(|v| v.to_string()).collect();
                let _ = writeln!(b, "\\begin{{tabular}}{{|c|{}|}}", "c".repeat(n));
                b.push_str("\\hline\n");
                let _ = writeln!(b, "{sym}&{}\\\\", header.join("&"));
                b.push_str("\\hline\n");
                for (x, row) in table.chunks(n).enumerate() {
                    let _ = writeln!(b, "{x}&{}\\\\", joined(row, "&"));
                }
            }
            1 => {
                b.push_str("\\begin{tabular}{|c|c|}\n\\hline\n");
                let _ = writeln!(b, "&{sym}\\\\");
                b.push_str("\\hline\n");
                for (x, v) in table.iter().enumerate() {
                    let _ = writeln!(b, "{x}&{v}\\\\");
                }
            }
            _ => {
                b.push_str("\\begin{tabular}{|c|}\n\\hline\n");
                let _ = writeln!(b, "{sym}\\\\");
                b.push_str("\\hline\n");
                let _ = writeln!(b, "{}\\\\", table[0]);
            }
        }
        b.push_str("\\hline\n\\end{tabular}\n");
        blocks.push(b);
    }
    format!(
        "\\begin{{center}}\n{}\\end{{center}}\n",
        blocks.join("\\quad\n")
    )
}
