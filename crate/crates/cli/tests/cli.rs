use std::process::{Command, Output};

fn twistmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistmin"))
        .args(args)
        .env_remove("TWISTMIN_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn space<'a>(level: &'a str, weight: &'a str, chi: &'a str) -> Vec<&'a str> {
    vec!["--level", level, "--weight", weight, "--character", chi]
}

#[test]
fn trace_csv_for_level_eleven() {
    let mut args = vec!["trace"];
    args.extend(space("11", "2", "11.1"));
    args.extend(["--nmax", "5", "--format", "csv", "--verify"]);
    let out = twistmin(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,value_pretty,order,coeffs");
    let values: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(values, ["1", "-2", "-1", "2", "1"]);
}

#[test]
fn delta_traces_are_ramanujan_tau() {
    let mut args = vec!["trace"];
    args.extend(space("1", "12", "1.1"));
    args.extend(["--nmax", "4", "--format", "csv"]);
    let text = stdout(&twistmin(&args));
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(values, ["1", "-24", "252", "-1472"]);
}

#[test]
fn trace_json_schema() {
    let mut args = vec!["trace"];
    args.extend(space("13", "2", "13.4"));
    args.extend(["--nmax", "3", "--verify"]);
    let out = twistmin(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["space"]["level"], 13);
    assert_eq!(doc["space"]["character"], "13.4");
    assert_eq!(doc["space"]["kind"], "min");
    assert_eq!(doc["verified"], true);
    let traces = doc["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 3);
    for (i, t) in traces.iter().enumerate() {
        assert_eq!(t["n"], i as u64 + 1);
        let v = &t["value"];
        assert_eq!(v["order"], 6);
        assert!(v["coeffs"].is_array());
        assert_eq!(v["approx"].as_array().unwrap().len(), 2);
    }
    assert_eq!(traces[0]["value"]["approx"][0], 1.0);
}

#[test]
fn dimensions_of_each_kind() {
    for (kind, expected) in [("min", "1"), ("new", "1"), ("full", "1")] {
        let mut args = vec!["dim"];
        args.extend(space("11", "2", "11.1"));
        args.extend(["--kind", kind]);
        assert_eq!(stdout(&twistmin(&args)).trim(), expected, "{kind}");
    }
    let mut args = vec!["dim"];
    args.extend(space("25", "6", "25.1"));
    args.extend(["--kind", "full"]);
    assert_eq!(stdout(&twistmin(&args)).trim(), "9");
}

#[test]
fn output_is_deterministic() {
    let mut args = vec!["basis"];
    args.extend(space("27", "2", "27.1"));
    args.extend(["--kind", "full"]);
    let a = twistmin(&args);
    let b = twistmin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn basis_json_has_certified_rank() {
    let mut args = vec!["basis"];
    args.extend(space("23", "2", "23.1"));
    let out = twistmin(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["certified_rank"], 2);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["source_character"], "23.1");
    assert_eq!(rows[0]["coeffs"].as_array().unwrap().len(), doc["truncation"].as_u64().unwrap() as usize);
}

#[test]
fn newform_coefficients_of_a_twist() {
    let out = twistmin(&[
        "newform-coeffs", "--level", "11", "--weight", "2", "--character", "11.1", "--psi", "3.2",
        "--bound", "7", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    // a_n(f) χ_{-3}(n) for the level 11 curve.
    assert_eq!(values, ["1", "2", "0", "2", "-1", "0", "-2"]);
}

#[test]
fn newform_coefficients_need_dimension_one() {
    let out = twistmin(&[
        "newform-coeffs", "--level", "23", "--weight", "2", "--character", "23.1", "--psi", "3.2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["trace", "--level", "11", "--weight", "1", "--character", "11.1"],
        vec!["trace", "--level", "11", "--weight", "2", "--character", "13.1"],
        vec!["trace", "--level", "11", "--weight", "2", "--character", "11.1", "--kind", "new", "--verify"],
        vec!["dim", "--level", "125", "--weight", "2", "--character", "125.7"],
        vec!["dim", "--level", "11", "--weight", "2", "--character", "11.1", "--kind", "other"],
        vec!["dim", "--level", "11"],
        vec!["bogus"],
        vec!["class-numbers", "--min", "5"],
    ];
    for args in cases {
        assert_eq!(twistmin(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn class_number_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    let out = twistmin(&["class-numbers", "--min", "-100", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == "-3,1,6"));
    assert!(text.lines().any(|l| l == "-23,3,2"));
    let out = Command::new(env!("CARGO_BIN_EXE_twistmin"))
        .args(["dim", "--level", "11", "--weight", "2", "--character", "11.1"])
        .env("TWISTMIN_CACHE", &path)
        .output()
        .unwrap();
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn selftest_passes_on_small_bounds() {
    let out = twistmin(&["selftest", "--max-level", "12", "--weights", "2,3", "--nmax", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("PASS"));
}

#[test]
fn class_numbers_default_to_working_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twistmin"))
        .args(["class-numbers", "--min", "-200"])
        .env_remove("TWISTMIN_CACHE")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("twistmin-class-numbers.txt")).unwrap();
    assert!(text.lines().count() >= 50);
}
