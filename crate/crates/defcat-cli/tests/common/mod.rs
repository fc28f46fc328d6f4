//! Golden-file cases shared by the CLI tests.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

/// `(golden name, arguments with the fixture last, expected exit code)`.
pub const CASES: &[(&str, &[&str], i32)] = &[
    ("check_vec_z2_gf2", &["check", "vec_z2_gf2.json"], 0),
    ("check_vec_z2_sign_q", &["check", "vec_z2_sign_q.json"], 0),
    ("check_vec_z3_q", &["check", "vec_z3_q.json"], 0),
    ("check_fibonacci_gf19", &["check", "fibonacci_gf19.json"], 0),
    ("check_vec_z2_gf2_def", &["check", "vec_z2_gf2_def.json"], 0),
    ("check_identity_vec_z2_gf2", &["check", "identity_vec_z2_gf2.json"], 0),
    ("check_identity_vec_z2_gf3_fibred", &["check", "identity_vec_z2_gf3_fibred.json"], 0),
    ("check_vec_z2_gf5_products", &["check", "vec_z2_gf5_products.json"], 0),
    ("check_ground_q", &["check", "ground_q.json"], 0),
    ("check_dual_numbers_q", &["check", "dual_numbers_q.json"], 0),
    ("check_dual_numbers_gf2", &["check", "dual_numbers_gf2.json"], 0),
    ("check_matrices2_gf3", &["check", "matrices2_gf3.json"], 0),
    ("cohomology_category_3_vec_z2_gf2", &["cohomology", "--kind", "category", "--degree", "3", "vec_z2_gf2.json"], 0),
    ("cohomology_category_3_vec_z3_q", &["cohomology", "--kind", "category", "--degree", "3", "vec_z3_q.json"], 0),
    ("cohomology_category_3_fibonacci_gf19", &["cohomology", "--kind", "category", "--degree", "3", "fibonacci_gf19.json"], 0),
    ("cohomology_coarse_3_vec_z2_gf2", &["cohomology", "--kind", "coarse", "--degree", "3", "vec_z2_gf2.json"], 0),
    ("cohomology_total_2_identity", &["cohomology", "--kind", "total", "--degree", "2", "identity_vec_z2_gf2.json"], 0),
    ("classify_category_vec_z2_gf2", &["classify", "--kind", "category", "vec_z2_gf2.json"], 0),
    ("classify_functor_identity", &["classify", "--kind", "functor", "identity_vec_z2_gf2.json"], 0),
    ("classify_fibred_identity", &["classify", "--kind", "fibred", "identity_vec_z2_gf2.json"], 0),
    ("classify_transformation_identity", &["classify", "--kind", "transformation", "identity_vec_z2_gf2.json"], 0),
    ("deform_vec_z2_gf2_def", &["deform", "--max-order", "3", "vec_z2_gf2_def.json"], 2),
    ("deform_identity_fibred", &["deform", "--max-order", "2", "identity_vec_z2_gf3_fibred.json"], 0),
    ("obstruct_vec_z2_gf2_def", &["obstruct", "--order", "2", "vec_z2_gf2_def.json"], 2),
    ("products_vec_z2_gf5", &["products", "vec_z2_gf5_products.json"], 0),
    ("units_vec_z2_gf2_def", &["units", "vec_z2_gf2_def.json"], 0),
    ("hochschild_ground_q", &["hochschild", "ground_q.json"], 0),
    ("hochschild_dual_numbers_q", &["hochschild", "dual_numbers_q.json"], 0),
    ("hochschild_dual_numbers_gf2", &["hochschild", "dual_numbers_gf2.json"], 0),
    ("hochschild_matrices2_gf3", &["hochschild", "--degree", "2", "matrices2_gf3.json"], 0),
    ("compare_dual_numbers_q", &["compare", "dual_numbers_q.json"], 0),
    ("compare_matrices2_gf3", &["compare", "--degree", "2", "matrices2_gf3.json"], 0),
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.json"))
}

/// Runs the binary with the fixture argument resolved; returns stdout and exit code.
pub fn run_cli(args: &[&str], extra: &[&str]) -> (String, i32) {
    let (fixture, flags) = args.split_last().expect("fixture argument");
    let out = Command::new(env!("CARGO_BIN_EXE_defcat"))
        .args(flags)
        .args(extra)
        .arg(crate_dir().join("fixtures").join(fixture))
        .output()
        .expect("binary runs");
    (String::from_utf8(out.stdout).expect("UTF-8 output"), out.status.code().unwrap_or(-1))
}

/// Compares every case against its golden file, or rewrites the files when
/// `UPDATE_GOLDEN` is set. Returns the names of mismatching cases.
pub fn golden_mismatches(extra: &[&str]) -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut bad = Vec::new();
    for (name, args, code) in CASES {
        let (out, got) = run_cli(args, extra);
        if got != *code {
            bad.push(format!("{name}: exit {got}, want {code}"));
            continue;
        }
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &out).expect("golden file writable");
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(out.as_str()) {
            bad.push(format!("{name}: output differs from {}", path.display()));
        }
    }
    bad
}
