use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lyapca(args: &[&str]) -> Output {
    lyapca_env(args, &[])
}

fn lyapca_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lyapca"));
    cmd.args(args).env_remove("CA_LYAPUNOV_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const X: &str = "origin=-12 valid=[-12,12]\n0 1 1 0 1 0 0 1 1 1 0 1 0 1 1 0 0 1 0 1 1 0 0 1 0\n";

#[test]
fn shift_pushes_a_perturbation_n_cells() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.txt", X);
    let o = lyapca(&["exponent", "--rule", "builtin:shift", "--side", "minus", "--n", "5", "--x", &x]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn coven_is_reported_onto() {
    let o = lyapca(&["surjective", "--rule", "builtin:coven:10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lyapca(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lyapca(&["reproduce", "nowhere"]).status.code(), Some(2));
    assert_eq!(lyapca(&["check", "entropy_nonsense", "--rule", "shift"]).status.code(), Some(2));
    let o = lyapca(&["avg-exponent", "--rule", "coven:10", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"), "{}", stderr(&o));
}

#[test]
fn budget_comes_from_flag_then_environment() {
    let args = ["lambda-mu", "--rule", "coven:10", "--side", "minus", "--n", "3"];
    let o = lyapca_env(&args, &[("CA_LYAPUNOV_BUDGET", "10")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--budget", "100000000"]);
    let o = lyapca_env(&with_flag, &[("CA_LYAPUNOV_BUDGET", "10")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "2.0\n");
    let o = lyapca_env(&args, &[("CA_LYAPUNOV_BUDGET", "lots")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_supplies_parameters_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"operation": "lambda-mu", "rule": "builtin:coven:10", "side": "plus", "n": 2, "format": "json"}"#,
    );
    let o = lyapca(&["lambda-mu", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["side"], "plus");
    assert_eq!(v["value"], 0.0);
    let o = lyapca(&["lambda-mu", "--config", &cfg, "--side", "minus", "--format", "text"]);
    assert_eq!(stdout(&o), "2.0\n");
}

#[test]
fn malformed_configs_exit_2_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", "{\n  \"rule\": \"shift\",\n  \"sede\": 4\n}");
    let o = lyapca(&["surjective", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("sede"), "{}", stderr(&o));

    let broken = write(dir.path(), "b.json", "{\"rule\": \"shift\",,}");
    let o = lyapca(&["surjective", "--config", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let missing = write(dir.path(), "c.json", r#"{"rule": "shift", "x": "/no/such/file.txt"}"#);
    let o = lyapca(&["surjective", "--config", &missing]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`x`"), "{}", stderr(&o));

    let other_op = write(dir.path(), "d.json", r#"{"operation": "entropy", "rule": "shift"}"#);
    assert_eq!(lyapca(&["surjective", "--config", &other_op]).status.code(), Some(2));
}

#[test]
fn rule_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let rule = lyapca::ca::io::rule_to_json(&lyapca::ca::builtin::by_name("coven:10").unwrap());
    let path = write(dir.path(), "coven.json", &rule);
    let o = lyapca(&["lambda-mu", "--rule", &path, "--side", "minus", "--n", "2"]);
    assert_eq!(stdout(&o), "2.0\n", "{}", stderr(&o));
}

#[test]
fn reports_do_not_depend_on_workers() {
    let run = |workers: &str| {
        let o = lyapca(&[
            "avg-exponent", "--rule", "coven:10", "--n-list", "4,8", "--samples", "400", "--seed", "9",
            "--format", "json", "--workers", workers,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
}

#[test]
fn csv_and_json_agree_field_by_field() {
    let base = [
        "avg-exponent", "--rule", "coven:10", "--n-list", "4,8", "--samples", "200", "--seed", "5",
    ];
    let json_out = lyapca(&[&base[..], &["--format", "json"]].concat());
    let csv_out = lyapca(&[&base[..], &["--format", "csv"]].concat());
    let rows: Vec<Value> = serde_json::from_str(&stdout(&json_out)).unwrap();
    let text = stdout(&csv_out);
    assert!(!text.contains('\r'));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), rows.len());
    for (record, row) in records.iter().zip(&rows) {
        for (name, cell) in header.iter().zip(record.iter()) {
            let expected = match &row[name] {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            assert_eq!(cell, expected, "column {name}");
        }
    }
}

#[test]
fn violated_check_exits_1() {
    let o = lyapca(&[
        "check", "entropy_average", "--rule", "coven:10", "--seed", "1", "--n", "6", "--samples", "4000",
        "--exponent-samples", "400", "--format", "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "violated", "{v}");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = ["entropy", "--kind", "topological", "--rule", "coven:10", "--p", "2", "--n", "4", "--format", "json"];
    let printed = lyapca(&args).stdout;
    let o = lyapca(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), printed);
}
