use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn twocoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twocoin"))
        .args(args)
        .output()
        .expect("failed to run twocoin")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_outputs_and_errors() {
    let o = twocoin(&["--format", "json", "params", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({"n": 6, "k": 2, "m": 2, "a": 2, "b": 6}));

    assert_eq!(stdout(&twocoin(&["params", "4"])), "n=4 k=2 m=0 a=8 b=8\n");
    assert_eq!(twocoin(&["params", "0"]).status.code(), Some(2));
    assert_eq!(twocoin(&["params", "2147483649"]).status.code(), Some(2));
    assert_eq!(twocoin(&["params", "-3"]).status.code(), Some(2));
    assert_eq!(twocoin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn scripted_roll_is_golden() {
    let args = ["roll", "6", "--count", "1", "--biased-script", "H", "--fair-script", "HTTHHTT"];
    let o = twocoin(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn single_sided_rolls_are_zero() {
    let o = twocoin(&["roll", "1", "--count", "5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n0\n0\n0\n0\n");
}

#[test]
fn seeded_rolls_repeat() {
    let args = ["roll", "100", "--count", "50", "--seed", "99", "--trace"];
    let first = twocoin(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, twocoin(&args).stdout);
    let lines = stdout(&first);
    assert_eq!(lines.lines().count(), 50);
    for line in lines.lines() {
        let value: u64 = line.split(' ').next().unwrap().parse().unwrap();
        assert!(value < 100);
    }
    assert_ne!(first.stdout, twocoin(&["roll", "100", "--count", "50", "--seed", "100", "--trace"]).stdout);
}

#[test]
fn exhausted_script_exits_three() {
    let o = twocoin(&["roll", "6", "--count", "2", "--biased-script", "H", "--fair-script", "HTTHHTT"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "0\n");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("roll 2") && err.contains("exhausted after 1 flips"), "{err}");

    let o = twocoin(&["roll", "6", "--biased-script", "HH", "--fair-script", "HTTHHT"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("fair source: script exhausted after 6 flips"));
}

#[test]
fn scripts_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let biased = dir.path().join("biased.txt");
    let fair = dir.path().join("fair.txt");
    std::fs::write(&biased, "h\n").unwrap();
    let mut f = std::fs::File::create(&fair).unwrap();
    writeln!(f, "HTT HH").unwrap();
    writeln!(f, "tt").unwrap();
    let o = twocoin(&[
        "roll",
        "6",
        "--trace",
        "--biased-script-file",
        biased.to_str().unwrap(),
        "--fair-script-file",
        fair.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 biased=H fair=HTT|HH|TT word=1 scaled=H d=3 d'=0 branch=d'\n");

    let missing = dir.path().join("missing.txt");
    let o = twocoin(&["roll", "6", "--fair-script-file", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(twocoin(&["roll", "6", "--fair-script", "HTX"]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = twocoin(&["verify", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n=6 pass\n");

    let o = twocoin(&["verify", "--range", "1..256"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(" pass") && l.starts_with("n=")).count(), 256);
    assert!(text.ends_with("256/256 pass\n"));

    let o = twocoin(&["verify", "100000000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("enumeration bound"));
    assert_eq!(twocoin(&["verify", "--range", "1000..1025"]).status.code(), Some(2));
    assert_eq!(twocoin(&["verify", "0"]).status.code(), Some(2));
    assert_eq!(twocoin(&["verify", "--range", "9..3"]).status.code(), Some(2));
    assert_eq!(twocoin(&["verify"]).status.code(), Some(2));

    let o = twocoin(&["--format", "json", "verify", "--range", "5..7"]);
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], serde_json::json!({"n": 6, "verdict": "pass"}));
}

#[test]
fn stats_and_bench_reports() {
    let o = twocoin(&["--format", "json", "stats", "1", "--samples", "100", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["statistic"], 0.0);
    assert_eq!(v["counts"], serde_json::json!([100]));
    assert_eq!(twocoin(&["stats", "6", "--samples", "10", "--seed", "1"]).status.code(), Some(2));

    for (n, fair) in [("6", 7.0), ("1024", 31.0)] {
        let o = twocoin(&["--format", "json", "bench", n, "--samples", "1000", "--seed", "1"]);
        assert_eq!(o.status.code(), Some(0));
        let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let row = &rows[0];
        assert_eq!(row["method"], "two-coin");
        assert_eq!(row["biased_per_roll"], 1.0);
        assert_eq!(row["fair_per_roll"], fair);
        assert_eq!(row["fair_min"], row["fair_max"]);
        assert_eq!(row["fair_variance"], 0.0);
    }
    let text = stdout(&twocoin(&["bench", "6", "--samples", "1000", "--seed", "1"]));
    assert!(text.lines().any(|l| l.starts_with("two-coin ") && l.contains("7.0000")));
}
