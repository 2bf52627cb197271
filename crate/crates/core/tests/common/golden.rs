//! The golden CLI corpus: each case runs the binary from `tests/golden/inputs`
//! and compares standard output with `tests/golden/<name>.out`.

use std::path::PathBuf;
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const CASES: &[Case] = &[
    Case {
        name: "phc_ray_scaling",
        args: &["check-order", "--relation", "phc", "e1.json", "half_2e1.json"],
        exit: 0,
    },
    Case {
        name: "phc_orthogonal",
        args: &["check-order", "--relation", "phc", "e1.json", "e2.json"],
        exit: 1,
    },
    Case {
        name: "marginal_origin",
        args: &["marginal", "origin_mass3.json"],
        exit: 0,
    },
    Case {
        name: "cx_spread",
        args: &["check-order", "--relation", "cx", "zero_1d.json", "pm1_1d.json"],
        exit: 0,
    },
    Case {
        name: "cx_reverse",
        args: &["check-order", "--relation", "cx", "pm1_1d.json", "zero_1d.json"],
        exit: 1,
    },
    Case {
        name: "w1_345",
        args: &["w1", "--norm", "l2", "origin_mass1.json", "p34.json"],
        exit: 0,
    },
];

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run_binary(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_phc-order"))
        .args(args)
        .current_dir(dir().join("inputs"))
        .output()
        .expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
        code: out.status.code().unwrap_or(-1),
    }
}

pub fn expected_stdout(case: &Case) -> String {
    std::fs::read_to_string(dir().join(format!("{}.out", case.name))).expect("golden output exists")
}
