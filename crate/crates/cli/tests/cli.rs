use std::path::PathBuf;
use std::process::{Command, Output};

use axmat::{builtin_matrix, canonical_form, parse_matrix, Matrix};

fn axmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axmat"))
        .args(args)
        .output()
        .expect("run axmat")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Splits search output into matrices, dropping witness and stats comments.
fn matrices(text: &str) -> Vec<Matrix> {
    text.split("\n\n")
        .filter(|block| block.contains("imp"))
        .map(|block| parse_matrix(block).unwrap())
        .collect()
}

#[test]
fn verify_m5_against_s() {
    let out = axmat(&[
        "verify",
        "--builtin",
        "robinson-S",
        "--builtin-matrix",
        "M5",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains(
        "normal: yes; kept: 12/12 valid; target S falsified at [p←3, q←0, r←2] -> value 1"
    ));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn verify_m4_against_k() {
    let out = axmat(&[
        "verify",
        "--builtin",
        "robinson-K",
        "--builtin-matrix",
        "M4",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn verify_m4_against_s_lists_k() {
    let out = axmat(&[
        "verify",
        "--builtin",
        "robinson-S",
        "--builtin-matrix",
        "M4",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(
        text.contains("K: falsified at [p←2, q←1] -> value 3"),
        "{text}"
    );
    assert!(text.contains("kept: 11/12 valid"));
}

#[test]
fn verify_from_files() {
    let out = axmat(&[
        "verify",
        "--problem",
        &fixture("meyer-parks-Bprime.problem"),
        "--matrix",
        &fixture("M3.matrix"),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("target B' falsified at [p←1, q←0, r←1] -> value 2"));
}

#[test]
fn verify_signature_mismatch_is_an_input_error() {
    let out = axmat(&[
        "verify",
        "--builtin",
        "robinson-S",
        "--builtin-matrix",
        "M3",
    ]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_requires_exactly_one_source() {
    assert_eq!(code(&axmat(&["verify", "--builtin-matrix", "M3"])), 2);
    let both = axmat(&[
        "verify",
        "--builtin",
        "robinson-S",
        "--problem",
        "x.problem",
        "--builtin-matrix",
        "M5",
    ]);
    assert_eq!(code(&both), 2);
}

#[test]
fn eval_examples() {
    for (formula, matrix, assign, expected) in [
        (
            "(p -> q -> r) -> (p -> q) -> p -> r",
            "M5",
            "p=3,q=0,r=2",
            "1 (non-designated)\n",
        ),
        ("p -> q -> p", "M4", "p=2,q=1", "3 (non-designated)\n"),
        ("p", "M3", "p=0", "0 (designated)\n"),
    ] {
        let out = axmat(&[
            "eval",
            formula,
            "--builtin-matrix",
            matrix,
            "--assign",
            assign,
        ]);
        assert_eq!(code(&out), 0);
        assert_eq!(stdout(&out), expected);
    }
}

#[test]
fn eval_errors() {
    for args in [
        [
            "eval",
            "p -> q",
            "--builtin-matrix",
            "M3",
            "--assign",
            "p=1",
        ],
        ["eval", "p", "--builtin-matrix", "M3", "--assign", "p=3"],
        ["eval", "p ->", "--builtin-matrix", "M3", "--assign", "p=0"],
        ["eval", "p", "--builtin-matrix", "M3", "--assign", "p:0"],
        [
            "eval",
            "p & q",
            "--builtin-matrix",
            "M3",
            "--assign",
            "p=0,q=0",
        ],
        ["eval", "p", "--builtin-matrix", "M9", "--assign", "p=0"],
    ] {
        let out = axmat(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn countermodel_command() {
    let out = axmat(&["countermodel", "p -> q", "--builtin-matrix", "B2"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "falsified at [p←0, q←1] -> value 1\n");
    let out = axmat(&["countermodel", "p -> q -> p", "--builtin-matrix", "B2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "valid\n");
}

#[test]
fn render_formats() {
    let native = axmat(&["render", "--builtin-matrix", "M5"]);
    assert_eq!(code(&native), 0);
    assert_eq!(
        parse_matrix(&stdout(&native)).unwrap(),
        builtin_matrix("M5").unwrap()
    );

    let md = stdout(&axmat(&[
        "render",
        "--builtin-matrix",
        "M3",
        "--format",
        "markdown",
    ]));
    assert!(md.contains("| → | 0 | 1 | 2 |"));
    assert!(md.contains("| 1 | 0 | 2 | 2 |"));

    let tex = stdout(&axmat(&[
        "render",
        "--builtin-matrix",
        "B2",
        "--format",
        "latex",
    ]));
    assert!(tex.starts_with("\\begin{center}"));
    assert!(tex.contains("$\\bot$\\\\\n\\hline\n1\\\\"));
    assert_eq!(tex.matches("\\begin{tabular}").count(), 5);

    assert_eq!(
        code(&axmat(&[
            "render",
            "--builtin-matrix",
            "M3",
            "--format",
            "xml"
        ])),
        2
    );
}

#[test]
fn search_finds_m3_up_to_isomorphism() {
    let out = axmat(&[
        "search",
        "--builtin",
        "meyer-parks-B'",
        "--size",
        "3",
        "--all",
        "--canonical-only",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let found = matrices(&text);
    assert!(found.contains(&canonical_form(&builtin_matrix("M3").unwrap())));
    assert_eq!(text.matches("# falsified B' at [").count(), found.len());
}

#[test]
fn emitted_matrices_verify() {
    let dir = std::env::temp_dir().join(format!("axmat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = axmat(&[
        "search",
        "--builtin",
        "meyer-parks-B'",
        "--sizes",
        "3..4",
        "--designated",
        "any",
        "--limit",
        "12",
    ]);
    assert_eq!(code(&out), 0);
    let found = matrices(&stdout(&out));
    assert_eq!(found.len(), 12);
    for (i, block) in stdout(&out).split("\n\n").enumerate() {
        let path = dir.join(format!("{i}.matrix"));
        std::fs::write(&path, block).unwrap();
        let check = axmat(&[
            "verify",
            "--builtin",
            "meyer-parks-B'",
            "--matrix",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&check), 0, "{block}\n{}", stdout(&check));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn two_valued_s_search_is_empty() {
    let out = axmat(&[
        "search",
        "--builtin",
        "robinson-S",
        "--sizes",
        "2..2",
        "--all",
    ]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn pinned_k_search_reaches_m4() {
    let out = axmat(&[
        "search",
        "--builtin",
        "robinson-K",
        "--size",
        "4",
        "--fix",
        "and=M4.and",
        "--fix",
        "or=M4.or",
        "--fix",
        "not=M4.not",
        "--fix",
        "false=M4.false",
        "--limit",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let found = matrices(&stdout(&out));
    assert_eq!(found, vec![builtin_matrix("M4").unwrap()]);
}

#[test]
fn fix_from_a_file() {
    let out = axmat(&[
        "search",
        "--builtin",
        "robinson-K",
        "--size",
        "4",
        "--limit",
        "1",
        "--fix",
        &format!("and={}", fixture("M4.matrix")),
        "--fix",
        &format!("or={}", fixture("M4.matrix")),
        "--fix",
        &format!("not={}", fixture("M4.matrix")),
        "--fix",
        &format!("false={}", fixture("M4.matrix")),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(matrices(&stdout(&out)).len(), 1);
}

#[test]
fn contradictory_fix_flags() {
    for fix in ["and=M4", "imp=nowhere.matrix", "xor=M4", "and"] {
        let out = axmat(&["search", "--builtin", "meyer-parks-B'", "--fix", fix]);
        assert_eq!(code(&out), 2, "{fix}");
        assert!(out.stdout.is_empty());
    }
    let wrong_size = axmat(&[
        "search",
        "--builtin",
        "robinson-K",
        "--size",
        "3",
        "--fix",
        "and=M4",
    ]);
    assert_eq!(code(&wrong_size), 2);
}

#[test]
fn budget_exhaustion_exits_three() {
    let out = axmat(&[
        "search",
        "--builtin",
        "robinson-S",
        "--budget",
        "0.2",
        "--stats",
    ]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    let stats = text.strip_prefix("# stats ").expect("only the stats line");
    let json: serde_json::Value = serde_json::from_str(stats.trim()).unwrap();
    assert_eq!(json["status"], "budget-exceeded");
    assert!(json["nodes"].as_u64().unwrap() > 0);
}

#[test]
fn stats_line_keeps_output_parseable() {
    let out = axmat(&["search", "--builtin", "meyer-parks-B'", "--all", "--stats"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("# stats {"));
    let json: serde_json::Value =
        serde_json::from_str(last.strip_prefix("# stats ").unwrap()).unwrap();
    assert_eq!(json["status"], "exhausted");
    assert_eq!(
        json["solutions"].as_u64().unwrap() as usize,
        matrices(&text).len()
    );
}

#[test]
fn deterministic_output_is_byte_identical() {
    let run = |jobs: &str| {
        axmat(&[
            "search",
            "--builtin",
            "meyer-parks-B'",
            "--size",
            "3",
            "--designated",
            "any",
            "--all",
            "--deterministic",
            "--jobs",
            jobs,
        ])
        .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    assert_eq!(one, run("3"));
}

#[test]
fn size_and_sizes_conflict() {
    let out = axmat(&[
        "search",
        "--builtin",
        "robinson-S",
        "--size",
        "2",
        "--sizes",
        "2..3",
    ]);
    assert_eq!(code(&out), 2);
    let out = axmat(&["search", "--builtin", "robinson-S", "--limit", "2", "--all"]);
    assert_eq!(code(&out), 2);
    let out = axmat(&["search", "--builtin", "robinson-S", "--jobs", "0"]);
    assert_eq!(code(&out), 2);
}
