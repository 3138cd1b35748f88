use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use sra_cli::{run, Output, EXIT_FAIL, EXIT_OK, EXIT_USAGE};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn model(name: &str) -> String {
    root().join("models").join(name).display().to_string()
}

fn sra(args: &[&str]) -> Output {
    let mut v = vec!["sra"];
    v.extend_from_slice(args);
    run(v)
}

#[test]
fn refine_term_by_skip() {
    let m = model("two_state.toml");
    let o = sra(&["--model", &m, "refine", "term", "skip"]);
    assert_eq!(o.code, EXIT_OK, "{o:?}");
    assert!(o.stdout.starts_with("HOLDS"));
    let o = sra(&["--model", &m, "refine", "skip", "term"]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stdout.contains("witness"), "{}", o.stdout);
}

#[test]
fn fixed_points() {
    let m = model("two_state.toml");
    assert_eq!(sra(&["--model", &m, "equal", "nil^w", "bot"]).code, EXIT_OK);
    let o = sra(&["--model", &m, "equal", "alpha^*", "alpha^w"]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stdout.contains("loop@"), "{}", o.stdout);
}

#[test]
fn usage_errors() {
    let m = model("two_state.toml");
    assert_eq!(sra(&["refine", "nil", "nil"]).code, EXIT_USAGE);
    assert_eq!(
        sra(&["--model", "/nonexistent.toml", "refine", "nil", "nil"]).code,
        EXIT_USAGE
    );
    let o = sra(&["--model", &m, "refine", "nil;", "nil"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(!o.stderr.is_empty());
    assert_eq!(
        sra(&["--model", &m, "equal", "atev(e)", "nil"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        sra(&["--model", &m, "check-laws", "--laws", "no-such-*"]).code,
        EXIT_USAGE
    );
    assert_eq!(sra(&["--model", &m, "frobnicate"]).code, EXIT_USAGE);
    assert_eq!(sra(&["--help"]).code, EXIT_OK);
}

#[test]
fn normalize_and_quintuple() {
    let m = model("two_state.toml");
    let o = sra(&["--model", &m, "normalize", "nil; pgm(r) \\/ bot"]);
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, "bot\n"));
    let o = sra(&["--model", &m, "normalize", "nil; pgm(r)"]);
    assert_eq!(o.stdout, "pgm(r)\n");
    let o = sra(&["--model", &m, "quintuple", "p", "r", "g", "g", "pgm(g)"]);
    assert_eq!(o.code, EXIT_OK, "{o:?}");
    // a step outside the guarantee
    let o = sra(&[
        "--model",
        &m,
        "quintuple",
        "p",
        "r",
        "g",
        "g",
        "pgm(r); skip",
    ]);
    assert_eq!(o.code, EXIT_FAIL, "{o:?}");
}

#[test]
fn check_laws_is_deterministic() {
    let m = model("two_state.toml");
    let args = [
        "--model",
        &m,
        "check-laws",
        "--laws",
        "A-sync-*",
        "--seed",
        "7",
    ];
    let a = sra(&args);
    let b = sra(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    let names: Vec<&str> = a
        .stdout
        .lines()
        .map(|l| l.split(' ').nth(1).unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn negative_entries_report_their_counterexample() {
    let m = model("two_state.toml");
    let o = sra(&["--model", &m, "check-laws", "--laws", "neg-*"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert!(o.stdout.lines().count() >= 3);
}

#[test]
fn replays() {
    for (m, s) in [
        ("two_state.toml", "rely-guar.drv"),
        ("two_state.toml", "conjoin-assumptions.drv"),
        ("three_state.toml", "test-sync-test.drv"),
        ("ccs.toml", "ccs-synchronise.drv"),
    ] {
        let script = root().join("scripts").join(s).display().to_string();
        let o = sra(&["--model", &model(m), "replay", &script]);
        assert_eq!(o.code, EXIT_OK, "{s}: {}", o.stdout);
        assert!(o.stdout.contains("REPLAY HOLDS"));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sra");
    let m = model("two_state.toml");
    let st = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let o = st(&["--model", &m, "equal", "nil^w", "bot"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "HOLDS nil^w = bot\n");
    assert_eq!(
        st(&["--model", &m, "equal", "nil", "bot"]).status.code(),
        Some(EXIT_FAIL)
    );
    assert_eq!(st(&["equal", "nil", "bot"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn exhausted_resources_exit_3() {
    let m = model("two_state.toml");
    let o = sra(&[
        "--model", &m, "--lasso", "12", "equal", "alpha^w", "alpha^w",
    ]);
    assert_eq!(o.code, sra_cli::EXIT_RESOURCE, "{o:?}");
    assert!(o.stdout.contains("loop cap"), "{o:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalize_is_idempotent(e in sra_expr()) {
        let m = model("two_state.toml");
        let once = sra(&["--model", &m, "normalize", &e]);
        prop_assert_eq!(once.code, EXIT_OK, "{:?}", once);
        let twice = sra(&["--model", &m, "normalize", once.stdout.trim_end()]);
        prop_assert_eq!(once.stdout, twice.stdout);
    }
}

fn sra_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("nil".to_string()),
        Just("bot".to_string()),
        Just("top".to_string()),
        Just("skip".to_string()),
        Just("test(p)".to_string()),
        Just("pgm(r)".to_string()),
        Just("env(g)".to_string()),
        Just("alpha".to_string()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}; {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} \\/ {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} /\\ {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} || {b})")),
            inner.clone().prop_map(|a| format!("({a})^*")),
            inner.prop_map(|a| format!("({a})^w")),
        ]
    })
}
