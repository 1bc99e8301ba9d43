mod input;

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Duration;

use axmat::problems::{parse_size_range, CheckError};
use axmat::{
    check_solution, eval, is_designated, parse, render_matrix, search_with, validates, Assignment,
    Designation, RenderFormat, SearchConfig, SearchStatus, Validity,
};
use clap::{Parser, Subcommand};

use input::{fail, load_fixed, InputError, MatrixSource, ProblemSource};

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 1;
const BAD_INPUT: u8 = 2;
const OUT_OF_BUDGET: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "axmat",
    version,
    about = "Check and search for logical matrices proving axiom independence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a matrix against a problem: normality, kept axioms, target.
    Verify {
        #[command(flatten)]
        problem: ProblemSource,
        #[command(flatten)]
        matrix: MatrixSource,
    },
    /// Print the first countermodel of a formula, or report it valid.
    Countermodel {
        formula: String,
        #[command(flatten)]
        matrix: MatrixSource,
    },
    /// Search for matrices solving a problem.
    Search(SearchArgs),
    /// Evaluate a formula under one assignment.
    Eval {
        formula: String,
        #[command(flatten)]
        matrix: MatrixSource,
        /// Bindings such as `p=3,q=0,r=2`.
        #[arg(long, value_name = "BINDINGS", default_value = "")]
        assign: String,
    },
    /// Print a matrix as native text, Markdown or LaTeX.
    Render {
        #[command(flatten)]
        matrix: MatrixSource,
        #[arg(long, default_value = "native", value_parser = clap::builder::ValueParser::new(parse_format))]
        format: RenderFormat,
    },
}

#[derive(clap::Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    problem: ProblemSource,
    /// Search a single size.
    #[arg(long, conflicts_with = "sizes")]
    size: Option<usize>,
    /// Search an inclusive size range, e.g. `2..4`.
    #[arg(long, value_name = "A..B")]
    sizes: Option<String>,
    /// Designated count: `1`, `any`, or per size as `4=3,5=1`.
    #[arg(long, value_name = "SPEC")]
    designated: Option<String>,
    /// Stop after this many solutions.
    #[arg(long, default_value_t = 1, conflicts_with = "all")]
    limit: usize,
    /// Emit every solution.
    #[arg(long)]
    all: bool,
    /// Emit one matrix per isomorphism class.
    #[arg(long)]
    canonical_only: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Emit solutions in sequential search order whatever the worker count.
    #[arg(long)]
    deterministic: bool,
    /// Give up after this many seconds.
    #[arg(long, value_name = "SECONDS")]
    budget: Option<f64>,
    /// Pin a connective's table, e.g. `and=M4.matrix`. Repeatable.
    #[arg(long, value_name = "CONN=SOURCE")]
    fix: Vec<String>,
    /// Append a `# stats {...}` line with search counters.
    #[arg(long)]
    stats: bool,
}

fn parse_format(s: &str) -> Result<RenderFormat, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { problem, matrix } => verify(&problem, &matrix),
        Command::Countermodel { formula, matrix } => countermodel(&formula, &matrix),
        Command::Search(args) => run_search(&args),
        Command::Eval {
            formula,
            matrix,
            assign,
        } => eval_command(&formula, &matrix, &assign),
        Command::Render { matrix, format } => render(&matrix, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(BAD_INPUT)
        }
    }
}

fn falsified(assignment: &Assignment, value: u8) -> String {
    format!("falsified at {assignment} -> value {value}")
}

fn verify(problem: &ProblemSource, matrix: &MatrixSource) -> Result<u8, InputError> {
    let p = problem.load()?;
    let m = matrix.load()?;
    if m.designated_count() == m.size() {
        println!("every value is designated; the target cannot be falsified");
        return Ok(NEGATIVE);
    }
    if !p.sizes().contains(&m.size())
        || !p
            .designation()
            .counts_for(m.size())
            .contains(&m.designated_count())
    {
        eprintln!(
            "note: size {} with {} designated lies outside the problem's search space",
            m.size(),
            m.designated_count()
        );
    }
    let at = p.at(m.size(), m.designated_count())?;
    let verdict = match check_solution(&at, &m) {
        Ok(v) => v,
        Err(CheckError::SignatureMismatch(c)) => {
            return fail(format!(
                "the matrix has no {c} table, which the problem needs"
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = io::stdout().lock();
    for a in &verdict.kept {
        match &a.validity {
            Validity::Valid => writeln!(out, "{}: valid", a.name),
            Validity::Countermodel { assignment, value } => {
                writeln!(out, "{}: {}", a.name, falsified(assignment, *value))
            }
        }?;
    }
    let valid = verdict.kept.len() - verdict.failures().count();
    let target = &p.target().name;
    let target_line = match &verdict.falsification_witness {
        Some((a, v)) => format!("target {target} {}", falsified(a, *v)),
        None => format!("target {target} valid"),
    };
    writeln!(
        out,
        "normal: {}; kept: {valid}/{} valid; {target_line}",
        if verdict.normality_ok { "yes" } else { "no" },
        verdict.kept.len()
    )?;
    Ok(if verdict.pass() { SUCCESS } else { NEGATIVE })
}

fn countermodel(formula: &str, matrix: &MatrixSource) -> Result<u8, InputError> {
    let f = parse(formula)?;
    let m = matrix.load()?;
    match validates(&m, &f)? {
        Validity::Valid => {
            println!("valid");
            Ok(SUCCESS)
        }
        Validity::Countermodel { assignment, value } => {
            println!("{}", falsified(&assignment, value));
            Ok(NEGATIVE)
        }
    }
}

fn eval_command(formula: &str, matrix: &MatrixSource, assign: &str) -> Result<u8, InputError> {
    let f = parse(formula)?;
    let m = matrix.load()?;
    let a: Assignment = if assign.trim().is_empty() {
        Assignment::new()
    } else {
        assign.parse()?
    };
    let v = eval(&m, &f, &a)?;
    let label = if is_designated(&m, v)? {
        "designated"
    } else {
        "non-designated"
    };
    println!("{v} ({label})");
    Ok(SUCCESS)
}

fn render(matrix: &MatrixSource, format: RenderFormat) -> Result<u8, InputError> {
    let m = matrix.load()?;
    print!("{}", render_matrix(&m, format));
    Ok(SUCCESS)
}

fn run_search(args: &SearchArgs) -> Result<u8, InputError> {
    let mut p = args.problem.load()?;
    let sizes = match (args.size, &args.sizes) {
        (Some(n), _) => Some(n..=n),
        (None, Some(s)) => Some(parse_size_range(s).map_err(InputError)?),
        (None, None) => None,
    };
    let designation = match &args.designated {
        Some(s) => Some(s.parse::<Designation>().map_err(InputError)?),
        None => None,
    };
    if sizes.is_some() || designation.is_some() {
        let sizes = sizes.unwrap_or_else(|| p.sizes());
        let designation = designation.unwrap_or_else(|| p.designation().clone());
        p = p.with_space(sizes, designation)?;
    }
    let budget = match args.budget {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return fail(format!("invalid budget `{s}`")),
        None => None,
    };
    let fixed = args
        .fix
        .iter()
        .map(|s| load_fixed(s))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SearchConfig {
        limit: if args.all { 0 } else { args.limit },
        canonical_only: args.canonical_only,
        deterministic: args.deterministic,
        workers: args.jobs,
        fixed,
        budget,
        ..SearchConfig::default()
    };
    let target = p.target().name.clone();
    let mut first = true;
    let mut write_error = None;
    let report = search_with(&p, &cfg, |s| {
        let mut out = io::stdout().lock();
        let sep = if first { "" } else { "\n" };
        first = false;
        let text = format!(
            "{sep}{}# falsified {target} at {} -> value {}\n",
            render_matrix(&s.matrix, RenderFormat::Native),
            s.witness.0,
            s.witness.1
        );
        if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
            write_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    if args.stats {
        let mut stats = serde_json::to_value(&report.stats)?;
        stats["status"] = serde_json::to_value(report.status)?;
        println!("{}# stats {stats}", if first { "" } else { "\n" });
    }
    eprintln!("search {}: {} solution(s)", report.status, report.emitted);
    Ok(match (report.emitted, report.status) {
        (n, _) if n > 0 => SUCCESS,
        (_, SearchStatus::BudgetExceeded) => OUT_OF_BUDGET,
        _ => NEGATIVE,
    })
}
