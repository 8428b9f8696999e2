use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gsite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsite"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn failing_records(report: &Value) -> Vec<(String, String)> {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| {
            (
                r["suite"].as_str().unwrap().to_string(),
                r["name"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn positive_suites_exit_zero_on_every_tower() {
    for tower in [None, Some(data("c3.json")), Some(data("s3_x_c2.json"))] {
        for suite in ["pretopology", "stability", "sheaf"] {
            let mut args = vec!["check", "--suite", suite, "--seed", "3", "--format", "json"];
            if let Some(t) = &tower {
                args.extend(["--tower", t.as_str()]);
            }
            let out = gsite(&args);
            let report = json(&out);
            assert_eq!(out.status.code(), Some(0), "{suite} {tower:?}: {report}");
            assert_eq!(report["summary"]["fail"], 0);
        }
    }
}

#[test]
fn full_run_fails_only_on_the_witness_records() {
    // The representable sheaf condition holds on the test sieves, so no
    // witness exists and those records are reported as failures.
    let out = gsite(&["check", "--suite", "all", "--seed", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let failing = failing_records(&report);
    assert_eq!(failing.len(), 3);
    assert!(failing.iter().all(|(suite, _)| suite == "witness"));
    let stability: Vec<_> = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["suite"] == "stability")
        .collect();
    assert_eq!(stability.len(), 6);
}

#[test]
fn reports_are_byte_stable() {
    let args = ["check", "--seed", "9", "--format", "json"];
    let a = gsite(&args);
    let b = gsite(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = gsite(&["check", "--seed", "9", "--suite", "sheaf"]);
    assert_eq!(
        text.stdout,
        gsite(&["check", "--seed", "9", "--suite", "sheaf"]).stdout
    );
}

#[test]
fn text_report_has_one_line_per_check() {
    let j = json(&gsite(&["check", "--seed", "2", "--format", "json"]));
    let out = gsite(&["check", "--seed", "2"]);
    let body = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    let n = j["records"].as_array().unwrap().len();
    assert_eq!(lines.len(), n + 1);
    for line in &lines[..n] {
        assert!(
            line.starts_with("PASS ") || line.starts_with("FAIL ") || line.starts_with("SKIP ")
        );
        assert!(line.contains(" [") && line.contains("] "));
    }
    assert!(lines[n].starts_with("summary:"));
}

#[test]
fn json_report_round_trips() {
    let out = gsite(&["check", "--suite", "pretopology", "--format", "json"]);
    let v = json(&out);
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
}

#[test]
fn self_test_injection_is_caught() {
    let out = gsite(&[
        "check",
        "--suite",
        "stability",
        "--self-test",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let failing = failing_records(&json(&out));
    assert_eq!(
        failing,
        vec![(
            "stability".to_string(),
            "self-test injected certificate".to_string()
        )]
    );
}

#[test]
fn malformed_inputs_exit_two() {
    let broken = data("broken_transition.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "--tower", &broken],
        vec!["check", "--tower", "/nonexistent/tower.json"],
        vec!["check", "--depth", "4"],
        vec!["check", "--object", "nonsense(1)"],
        vec!["check", "--suite", "bogus"],
        vec!["witness", "coset(1:5)"],
        vec!["hom", "G", "G + *"],
        vec!["refine", "--case", "6"],
    ];
    for args in cases {
        let out = gsite(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn witness_exit_codes() {
    let out = gsite(&["witness", "quot(1)", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!((v["lhs"].as_u64(), v["rhs"].as_u64()), (Some(0), Some(0)));
    assert_eq!(v["pair_indexed_families"], 2);

    let out = gsite(&["witness", "G", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["pair_indexed_families"], 8);

    let out = gsite(&["witness", "*"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("trivial action"));

    let out = gsite(&[
        "witness",
        "quot(2)",
        "--subgroup",
        "1:",
        "--subgroup",
        "1:1",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    // Hom(G/U_1 + *, G/U_2) = 2 * 0
    assert_eq!((v["lhs"].as_u64(), v["rhs"].as_u64()), (Some(0), Some(0)));
}

#[test]
fn orbits_and_hom() {
    let out = gsite(&["orbits", "quot(1) + * + coset(3:4)", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let sizes: Vec<usize> = v["orbits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["elements"].as_array().unwrap().len())
        .collect();
    assert_eq!(sizes, vec![2, 1, 4]);
    assert_eq!(v["decomposition_bijective"], true);

    let count = |a: &str, b: &str| {
        json(&gsite(&["hom", a, b, "--format", "json"]))["count"]
            .as_u64()
            .unwrap()
    };
    assert_eq!(count("G", "G"), 8);
    assert_eq!(count("quot(1)", "G"), 0);
    assert_eq!(count("empty", "G"), 1);
    assert_eq!(count("G", "quot(2)"), 4);
    assert_eq!(count("quot(1)", "quot(1)"), 2);
    assert_eq!(count("quot(1)", "*"), 1);
    assert_eq!(count("*", "quot(1)"), 0);
}

#[test]
fn refine_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("certs.json");
    let p = path.to_str().unwrap();
    let out = gsite(&[
        "refine", "--count", "3", "--seed", "5", "--format", "json", "--out", p,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(gsite(&["refine", "--verify", p]).status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let certs: Vec<Value> = written
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["certificate"].clone())
        .collect();
    assert_eq!(certs.len(), 18);
    let labels: std::collections::BTreeSet<&str> =
        certs.iter().map(|c| c["case"].as_str().unwrap()).collect();
    assert_eq!(labels.len(), 6);

    let cert_path = dir.path().join("only.json");
    std::fs::write(&cert_path, serde_json::to_string(&certs).unwrap()).unwrap();
    let out = gsite(&["refine", "--verify", cert_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // case 3 connects through the identity; any other translation breaks
    // the square
    let mut tampered = certs.clone();
    let c = tampered.iter_mut().find(|c| c["case"] == "3").unwrap();
    assert_eq!(
        c["factors"][0]["connecting"]["gamma"],
        serde_json::json!([0, 0, 0])
    );
    c["factors"][0]["connecting"]["gamma"] = serde_json::json!([1, 1, 1]);
    std::fs::write(&cert_path, serde_json::to_string(&tampered).unwrap()).unwrap();
    let out = gsite(&["refine", "--verify", cert_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
