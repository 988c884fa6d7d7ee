//! Shared golden-corpus runner: each case pins the full stdout (and
//! stderr for failing commands) of one CLI invocation, byte for byte.

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

/// Every subcommand and worked example, including both error paths.
pub const CASES: &[GoldenCase] = &[
    GoldenCase {
        name: "aut_mul_identity",
        args: &["aut", "mul", "z", "z + z^2", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_mul_scaling",
        args: &["aut", "mul", "z + z^2", "2z", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_mul_scaling_reversed",
        args: &["aut", "mul", "2z", "z + z^2", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_inv_scaling",
        args: &["aut", "inv", "2z", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_inv_unipotent",
        args: &["aut", "inv", "z + z^2", "--order", "4"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_inv_from_file",
        args: &["aut", "inv", "@series_2z.json"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_project",
        args: &["aut", "project", "z + z^2 + z^3", "--order", "4", "--to", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_decompose",
        args: &["aut", "decompose", "3·z + 6·z^2", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "aut_decompose_unipotent",
        args: &["aut", "decompose", "z + z^2", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "cocycle_identity",
        args: &["cocycle", "--chart", "chart.json", "-s", "t", "-t", "t", "--order", "4"],
        exit: 0,
    },
    GoldenCase {
        name: "cocycle_square",
        args: &["cocycle", "--chart", "chart.json", "-s", "s2", "-t", "t", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "cocycle_square_at_point",
        args: &[
            "cocycle", "--chart", "chart.json", "-s", "s2", "-t", "t", "--order", "3",
            "--at", "3",
        ],
        exit: 0,
    },
    GoldenCase {
        name: "cocycle_inverse_coordinate",
        args: &["cocycle", "--chart", "chart.json", "-s", "inv", "-t", "t", "--order", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "cocycle_consistency",
        args: &[
            "cocycle", "--chart", "chart.json", "-s", "inv", "-t", "s2", "--order", "5",
            "--consistency-with", "mob",
        ],
        exit: 0,
    },
    GoldenCase {
        name: "oper_is_oper_true",
        args: &["oper", "is-oper", "--conn", "conn_sl2.json"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_is_oper_diagnostics",
        args: &["oper", "is-oper", "--conn", "notoper.json"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_canonicalize_sl2",
        args: &["oper", "canonicalize", "--conn", "conn_sl2.json", "--with-gauge"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_canonicalize_sl3",
        args: &["oper", "canonicalize", "--conn", "conn_sl3.json"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_change_coords",
        args: &[
            "oper", "change-coords", "--canon", "canon_sl2.json", "--to", "inv",
            "--with-gauge",
        ],
        exit: 0,
    },
    GoldenCase {
        name: "oper_change_coords_affine",
        args: &["oper", "change-coords", "--canon", "canon_sl2.json", "--to", "half"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_schwarzian_mobius",
        args: &["oper", "schwarzian", "--chart", "chart.json", "-t", "mob", "-s", "t"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_schwarzian_square",
        args: &["oper", "schwarzian", "--chart", "chart.json", "-t", "s2", "-s", "t"],
        exit: 0,
    },
    GoldenCase {
        name: "oper_cocycle_check_sl2",
        args: &[
            "oper", "cocycle-check", "--chart", "chart.json", "--lie", "sl2", "--ti", "t",
            "--tj", "inv",
        ],
        exit: 0,
    },
    GoldenCase {
        name: "oper_cocycle_check_sl3",
        args: &[
            "oper", "cocycle-check", "--chart", "chart.json", "--lie", "sl3", "--ti", "t",
            "--tj", "inv",
        ],
        exit: 0,
    },
    GoldenCase {
        name: "error_parse_malformed_json",
        args: &["aut", "inv", "@malformed.json"],
        exit: 2,
    },
    GoldenCase {
        name: "error_parse_bad_literal",
        args: &["aut", "inv", "qq", "--order", "3"],
        exit: 2,
    },
    GoldenCase {
        name: "error_domain_not_a_jet",
        args: &["aut", "inv", "1 + z", "--order", "3"],
        exit: 3,
    },
    GoldenCase {
        name: "error_domain_not_an_oper",
        args: &["oper", "canonicalize", "--conn", "notoper.json"],
        exit: 3,
    },
    GoldenCase {
        name: "error_domain_unknown_coordinate",
        args: &["cocycle", "--chart", "chart.json", "-s", "nosuch", "-t", "t", "--order", "3"],
        exit: 3,
    },
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct CaseOutcome {
    pub stdout: String,
    pub stderr: String,
    pub exit: i32,
}

pub fn run_case(case: &GoldenCase) -> CaseOutcome {
    let out = Command::new(env!("CARGO_BIN_EXE_opercal"))
        .args(case.args)
        .current_dir(golden_dir())
        .output()
        .expect("binary runs");
    CaseOutcome {
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
        exit: out.status.code().unwrap_or(-1),
    }
}

/// Runs every case against its frozen expectation; returns failure
/// descriptions (empty = all byte-exact).
pub fn check_all() -> Vec<String> {
    let mut failures = Vec::new();
    for case in CASES {
        let outcome = run_case(case);
        let expected_out = golden_dir().join(format!("expected/{}.txt", case.name));
        let expected_err = golden_dir().join(format!("expected/{}.stderr.txt", case.name));
        let want_out = std::fs::read_to_string(&expected_out).unwrap_or_default();
        let want_err = std::fs::read_to_string(&expected_err).unwrap_or_default();
        if outcome.exit != case.exit {
            failures.push(format!(
                "{}: exit {} (expected {}); stderr: {}",
                case.name, outcome.exit, case.exit, outcome.stderr
            ));
            continue;
        }
        if outcome.stdout != want_out {
            failures.push(format!(
                "{}: stdout mismatch\n--- got ---\n{}\n--- want ---\n{}",
                case.name, outcome.stdout, want_out
            ));
        }
        if outcome.stderr != want_err {
            failures.push(format!(
                "{}: stderr mismatch\n--- got ---\n{}\n--- want ---\n{}",
                case.name, outcome.stderr, want_err
            ));
        }
    }
    failures
}
