#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Golden cases: file stem and arguments, run from the crate root.
pub const CASES: &[(&str, &[&str])] = &[
    ("solve_diagonal", &["solve", "tests/fixtures/diagonal.json"]),
    ("solve_second_price_oracle", &["solve", "tests/fixtures/second_price.json", "--oracle"]),
    ("solve_rooms_csv", &["solve", "tests/fixtures/rooms.csv", "--scale", "100"]),
    ("prices_rooms", &["prices", "tests/fixtures/rooms.csv", "--scale", "100"]),
    ("prices_tied_buyer_optimal", &["prices", "tests/fixtures/tied.json", "--buyer-optimal"]),
    ("vcg_second_price", &["vcg", "tests/fixtures/second_price.json"]),
    ("vcg_rooms", &["vcg", "tests/fixtures/rooms.csv", "--scale", "100"]),
    ("check_second_price", &["check", "tests/fixtures/second_price.json"]),
    ("check_tied_certificate", &["check", "tests/fixtures/tied.json", "--certificate"]),
    (
        "check_diagonal_supplied",
        &["check", "tests/fixtures/diagonal.json", "--certificate", "--prices", "tests/fixtures/diagonal_high.json"],
    ),
    ("verify_diagonal_high", &["verify", "tests/fixtures/diagonal.json", "--prices", "tests/fixtures/diagonal_high.json"]),
    ("verify_diagonal_bad", &["verify", "tests/fixtures/diagonal.json", "--prices", "tests/fixtures/diagonal_bad.json"]),
    (
        "meet_diagonal",
        &["meet", "tests/fixtures/diagonal.json", "tests/fixtures/diagonal_high.json", "tests/fixtures/diagonal_low.json"],
    ),
    (
        "audit_rooms_dave",
        &["audit", "tests/fixtures/rooms.csv", "--scale", "100", "--bidder", "dave", "--trials", "20", "--seed", "7"],
    ),
    (
        "audit_diagonal_grid",
        &["audit", "tests/fixtures/diagonal.json", "--bidder", "ben", "--strategy", "grid"],
    ),
];

pub fn crate_root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_root().join("tests/golden").join(format!("{name}.json"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchmarket"))
        .args(args)
        .current_dir(crate_root())
        .output()
        .expect("binary runs")
}
