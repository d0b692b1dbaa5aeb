use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn symwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symwalk"))
        .args(args)
        .env_remove("SYMWALK_THREADS")
        .output()
        .expect("spawn symwalk")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Splits a CSV payload into its manifest JSON and the remaining lines.
fn split_csv(text: &str) -> (Value, String) {
    let (first, rest) = text.split_once('\n').unwrap();
    let json = first.strip_prefix("# manifest ").expect("manifest line");
    (serde_json::from_str(json).unwrap(), rest.to_string())
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("SYMWALK_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn rows(body: &str) -> Vec<Vec<String>> {
    body.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn profile_golden_and_manifest() {
    let out = symwalk(&["profile", "--walk", "rt", "--n", "6", "--mode", "continuous", "--t-grid", "0,1,n"]);
    assert_eq!(out.status.code(), Some(0));
    let (manifest, body) = split_csv(&stdout(&out));
    assert_eq!(manifest["schema"], "symwalk-output/1");
    assert_eq!(manifest["command"], "profile");
    assert_eq!(manifest["params"]["n"], 6);
    assert_eq!(manifest["precision"], 128);
    assert!(manifest["wall_time_secs"].as_f64().unwrap() >= 0.0);
    golden("profile_rt_6.csv", &body);

    let r = rows(&body);
    let d2: f64 = r[0][5].parse().unwrap();
    assert!((d2 - 719f64.sqrt()).abs() < 1e-12);
    assert_eq!(r[2][4], "6");
}

#[test]
fn profile_alternating_golden() {
    let out = symwalk(&["profile", "--walk", "class:3", "--n", "7", "--group", "an", "--t-grid", "0,2,5,10"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, body) = split_csv(&stdout(&out));
    golden("profile_3cycle_7_an.csv", &body);
    let d0: f64 = rows(&body)[0][5].parse().unwrap();
    assert!((d0 - 2519f64.sqrt()).abs() < 1e-12);
}

#[test]
fn profile_auto_grid_is_decreasing_json() {
    let out = symwalk(&["profile", "--walk", "class:3", "--n", "12", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let res = v["results"].as_array().unwrap();
    assert_eq!(res.len(), 41);
    let d: Vec<f64> = res.iter().map(|r| r["d2"].as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(v["manifest"]["command"], "profile");
}

#[test]
fn simulate_golden_and_reproducible() {
    let args = ["simulate", "--walk", "ttr", "--n", "10", "--t", "n", "--j", "2,3", "--N", "1000", "--seed", "3"];
    let out = symwalk(&args);
    assert_eq!(out.status.code(), Some(0));
    let (manifest, body) = split_csv(&stdout(&out));
    assert_eq!(manifest["seed"], 3);
    golden("simulate_ttr_10.csv", &body);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let mut with_out = args.to_vec();
        with_out.extend(["--output", p.to_str().unwrap()]);
        assert_eq!(symwalk(&with_out).status.code(), Some(0));
    }
    let (_, ra) = split_csv(&std::fs::read_to_string(&a).unwrap());
    let (_, rb) = split_csv(&std::fs::read_to_string(&b).unwrap());
    assert_eq!(ra, rb);

    let r = rows(&body);
    let empirical: f64 = r[0][6].parse().unwrap();
    let tail: f64 = r[0][7].parse().unwrap();
    let est: f64 = r[0][8].parse().unwrap();
    assert!((est - (empirical - tail)).abs() < 1e-12);
    // 1 - P(no fixed point) - P(one fixed point) for a uniform permutation of 10
    assert!((tail - (1.0 - (1334961.0 + 10.0 * 133496.0) / 3628800.0)).abs() < 1e-12);
}

#[test]
fn verify_summary_and_exit_codes() {
    let out = symwalk(&["verify", "--suite", "rt-discrete", "--n", "15..17"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["summary"]["total"], 9);
    assert_eq!(v["summary"]["failed"], 0);

    let out = symwalk(&["verify", "--suite", "oracle", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["summary"]["passed"], v["summary"]["total"]);

    // the lemma sweep reports the failing envelope from n = 15 on
    let out = symwalk(&["verify", "--suite", "lemmas", "--n", "14..15"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["summary"]["failed"].as_u64().unwrap() >= 1);
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["profile", "--walk", "ri", "--n", "6"],
        &["profile", "--walk", "class:4", "--n", "11", "--group", "an"],
        &["profile", "--walk", "bogus", "--n", "6"],
        &["profile", "--walk", "rt", "--n", "6", "--t-grid", "n/2"],
        &["simulate", "--walk", "ttr", "--n", "10", "--t", "n", "--N", "999"],
        &["simulate", "--walk", "ttr", "--n", "10", "--t", "n", "--j", "11"],
        &["--precision", "8", "profile", "--walk", "rt", "--n", "6"],
        &["verify", "--suite", "nope", "--n", "5"],
    ];
    for args in cases {
        let out = symwalk(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn resource_guards_exit_3() {
    assert_eq!(symwalk(&["profile", "--walk", "rt", "--n", "60"]).status.code(), Some(3));
    assert_eq!(symwalk(&["verify", "--suite", "oracle", "--n", "8"]).status.code(), Some(3));
}

#[test]
fn thread_env_overrides_flag() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_symwalk"));
        cmd.args(["--threads", "3", "profile", "--walk", "rt", "--n", "5", "--t-grid", "0"]);
        match env {
            Some(v) => cmd.env("SYMWALK_THREADS", v),
            None => cmd.env_remove("SYMWALK_THREADS"),
        };
        cmd.output().unwrap()
    };
    let (m, _) = split_csv(&stdout(&run(None)));
    assert_eq!(m["threads"], 3);
    let (m, _) = split_csv(&stdout(&run(Some("2"))));
    assert_eq!(m["threads"], 2);
    assert_eq!(run(Some("x")).status.code(), Some(2));
}

#[test]
fn small_values_use_scientific_notation() {
    let out = symwalk(&["profile", "--walk", "rt", "--n", "8", "--t-grid", "60"]);
    let (_, body) = split_csv(&stdout(&out));
    let d2 = &rows(&body)[0][5];
    assert!(d2.contains('e'), "{d2}");
    assert!(d2.parse::<f64>().unwrap() < 1e-4);
}
