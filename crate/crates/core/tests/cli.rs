use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn setfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_schema(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_0_on_success() {
    let o = setfree(&["chi", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chi(t) = t^3 - 4t^2 + 3t"));

    let o = setfree(&["count", "--n", "2", "--k", "3", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("432"));
}

#[test]
fn exit_1_on_failed_degree_bound() {
    // An arity-4 generator gives c_1 of degree 4, above the bound 3i = 3.
    let dir = tempfile::tempdir().unwrap();
    let path = write_schema(
        dir.path(),
        "four.json",
        r#"{"name": "four", "p": 5, "generators": [[1, -1], [1, 1, 1, 2]]}"#,
    );
    let o = setfree(&["coeffs", "--family", &path, "--i", "1", "--kmax", "5", "--holdout", "6"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn exit_1_on_failed_holdout() {
    // With k = 0..=3 the degree-3 fit is pure interpolation and succeeds,
    // but c_1 picks up C(k,4) terms from k = 4 on.
    let dir = tempfile::tempdir().unwrap();
    let path = write_schema(
        dir.path(),
        "four.json",
        r#"{"name": "four", "p": 5, "generators": [[1, -1], [1, 1, 1, 2]]}"#,
    );
    let o = setfree(&["coeffs", "--family", &path, "--i", "1", "--kmax", "3", "--holdout", "4"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn exit_2_on_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let no_diff = write_schema(
        dir.path(),
        "nodiff.json",
        r#"{"name": "nodiff", "p": 3, "generators": [[1, 1, 1]], "ensure_distinct": false}"#,
    );
    let bad_prime = write_schema(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "p": 4, "generators": [[1, -1]]}"#,
    );
    for args in [
        vec!["chi", "--k", "3", "--family", "nope"],
        vec!["validate", "--family", no_diff.as_str()],
        vec!["validate", "--family", bad_prime.as_str()],
        vec!["count", "--n", "1", "--k", "2", "--char", "generic"],
        vec!["chi", "--k", "3", "--char", "4"],
        vec!["chi", "--k", "3", "--budget", "0"],
        vec!["prob", "--n", "1", "--k", "4"],
        vec!["frobnicate"],
    ] {
        let o = setfree(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn exit_3_on_budget() {
    let o = setfree(&["chi", "--k", "6", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
    let o = setfree(&["count", "--n", "4", "--k", "9", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn table_skips_rows_over_budget() {
    let o = setfree(&[
        "table", "--kmax", "3", "--nmax", "4", "--budget", "400", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("k,n,q,chi_eval,oracle_count,match,c_0,c_1,c_2,c_3\n"));
    assert!(out.contains("skipped"));
    // no row says match unless its two numbers agree
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(out.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[5] == "match" {
            assert_eq!(&rec[3], &rec[4]);
        }
    }
}

#[test]
fn json_document_shape() {
    let o = setfree(&["chi", "--k", "4", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["query"]["k"], 4);
    assert_eq!(doc["result"]["chi"], "t^4 - 10t^3 + 27t^2 - 18t");
    assert_eq!(doc["result"]["coefficients"][3], "18");
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn output_is_byte_deterministic() {
    let runs: [&[&str]; 4] = [
        &["table", "--kmax", "4", "--nmax", "2", "--format", "csv"],
        &[
            "prob",
            "--n",
            "2",
            "--k",
            "4",
            "--seed",
            "5",
            "--samples",
            "20000",
            "--format",
            "json",
        ],
        &["coeffs", "--i", "1", "--format", "json"],
        &["compare", "--kmax", "3", "--coeff", "2", "--format", "csv"],
    ];
    for args in runs {
        let a = setfree(args);
        let b = setfree(args);
        let mut single: Vec<&str> = args.to_vec();
        single.extend(["--threads", "1"]);
        let c = setfree(&single);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?} with one thread");
    }
}

#[test]
fn compare_reports_characteristic_dependence() {
    let o = setfree(&["compare", "--kmax", "3"]);
    let out = stdout(&o);
    assert!(out.contains("k = 2: all equal"));
    assert!(out.contains("k = 3: DIFFER"));
    assert!(out.contains("F_3: 6 flats, chi = t^3 - 4t^2 + 3t"));
    assert!(out.contains("Q: 10 flats, chi = t^3 - 4t^2 + 5t - 2"));
}

#[test]
fn validate_auto_adds_difference_generator() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_schema(
        dir.path(),
        "ap.json",
        r#"{"name": "ap", "p": 5, "generators": [[1, -2, 1]]}"#,
    );
    let o = setfree(&["validate", "--family", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("added"));
}
