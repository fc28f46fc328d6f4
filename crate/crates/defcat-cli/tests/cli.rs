mod common;

use common::{golden_mismatches, run_cli};

#[test]
fn golden_outputs() {
    let bad = golden_mismatches(&[]);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn spec_examples() {
    let (out, code) = run_cli(&["check", "vec_z2_gf2.json"], &[]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&out).unwrap(), serde_json::json!({"pentagon": "ok", "triangle": "ok"}));
    let (out, code) = run_cli(&["cohomology", "--kind", "category", "--degree", "3", "vec_z2_gf2.json"], &[]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&out).unwrap(), serde_json::json!({"dim": 1}));
}

#[test]
fn load_failures_exit_one() {
    for fixture in ["bad_prime.json", "vec_z2_sign_q_corrupt.json", "missing.json"] {
        let (out, code) = run_cli(&["check", fixture], &[]);
        assert_eq!((out.as_str(), code), ("", 1), "{fixture}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run_cli(&["frobnicate", "vec_z2_gf2.json"], &[]).1, 1);
    assert_eq!(run_cli(&["cohomology", "--kind", "category", "vec_z2_gf2.json"], &[]).1, 1);
    assert_eq!(run_cli(&["cohomology", "--kind", "functor", "--degree", "2", "vec_z2_gf2.json"], &[]).1, 1);
}

#[test]
fn degree_cap_from_environment() {
    let run = |cap: &str| {
        std::process::Command::new(env!("CARGO_BIN_EXE_defcat"))
            .args(["cohomology", "--kind", "category", "--degree", "3"])
            .arg(common::crate_dir().join("fixtures/vec_z2_gf2.json"))
            .env("DEFCAT_MAX_DEGREE", cap)
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(run("2"), Some(1));
    assert_eq!(run("3"), Some(0));
}
