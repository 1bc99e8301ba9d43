use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use axmat::matrix::parse_matrix_blocks;
use axmat::{
    builtin_matrix, builtin_problem, parse_matrix, parse_problem, Connective, IndependenceProblem,
    Matrix, Value,
};
use clap::Args;

/// Any failure that maps to exit status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub fn fail<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// Problem file.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    /// Built-in problem: robinson-S, robinson-K or meyer-parks-B'.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
}

impl ProblemSource {
    pub fn load(&self) -> Result<IndependenceProblem, InputError> {
        match (&self.problem, &self.builtin) {
            (Some(path), _) => {
                let text = read(path)?;
                parse_problem(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
            }
            (None, Some(name)) => Ok(builtin_problem(name)?),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct MatrixSource {
    /// Matrix file.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Built-in matrix: M5, M4, M3 or B2.
    #[arg(long = "builtin-matrix", value_name = "NAME")]
    pub builtin_matrix: Option<String>,
}

impl MatrixSource {
    pub fn load(&self) -> Result<Matrix, InputError> {
        match (&self.matrix, &self.builtin_matrix) {
            (Some(path), _) => {
                let text = read(path)?;
                parse_matrix(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
            }
            (None, Some(name)) => builtin(name),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

fn builtin(name: &str) -> Result<Matrix, InputError> {
    builtin_matrix(name).map_or_else(|| fail(format!("unknown built-in matrix `{name}`")), Ok)
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Parses `CONN=SRC` and loads that connective's table from SRC.
///
/// SRC is a matrix file (only the named block is required), a built-in
/// matrix name, or `NAME.anything` naming a built-in when no such file exists.
pub fn load_fixed(spec: &str) -> Result<(Connective, Vec<Value>), InputError> {
    let Some((conn, src)) = spec.split_once('=') else {
        return fail(format!("malformed --fix `{spec}`: expected CONN=SOURCE"));
    };
    let connective = Connective::from_keyword(conn.trim())
        .map_or_else(|| fail(format!("unknown connective `{conn}` in --fix")), Ok)?;
    let src = src.trim();
    let path = Path::new(src);
    let table = if path.exists() {
        let text = read(path)?;
        let blocks = parse_matrix_blocks(&text).map_err(|e| InputError(format!("{src}: {e}")))?;
        blocks.tables[connective.index()].clone()
    } else {
        let name = match builtin_matrix(src) {
            Some(_) => src,
            None => src.split_once('.').map_or(src, |(stem, _)| stem),
        };
        match builtin_matrix(name) {
            Some(m) => m.table(connective).map(<[Value]>::to_vec),
            None => {
                return fail(format!(
                    "--fix source `{src}` is neither a file nor a built-in matrix"
                ))
            }
        }
    };
    match table {
        Some(cells) => Ok((connective, cells)),
        None => fail(format!("--fix source `{src}` has no {connective} table")),
    }
}
