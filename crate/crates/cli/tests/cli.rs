use std::process::{Command, Output};

fn efgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efgl")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn list_scenarios_both_spellings() {
    let a = efgl(&["list-scenarios"]);
    let b = efgl(&["--list-scenarios"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for name in ["tate-p2", "empty-checks", "z2def-full"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn tate_command_reports_every_check() {
    let out = efgl(&["tate", "--p", "2", "--r", "1", "--alpha", "-1", "--cap", "6", "--check", "coproduct,axioms,multiplicativity"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["status"], "pass");
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["coproduct", "axioms", "multiplicativity"]);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["residual"] == "0"));
}

#[test]
fn z2def_and_lt2_commands_pass() {
    let z2 = efgl(&["z2def", "--cap", "8", "--verify", "q0,correction,z2cob58"]);
    assert_eq!(z2.status.code(), Some(0));
    assert_eq!(json(&z2)["checks"].as_array().unwrap().len(), 3);
    let lt = efgl(&["lt2", "--h", "1", "--cap", "8", "--verify", "relations"]);
    assert_eq!(lt.status.code(), Some(0));
    assert_eq!(json(&lt)["checks"][0]["name"], "relations (h = 1)");
}

#[test]
fn fgl_and_elliptic_commands_pass() {
    for args in [&["fgl", "--cap", "6"][..], &["elliptic", "formal-group"], &["elliptic", "classification"], &["elliptic", "torsion"]] {
        let out = efgl(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn mathematical_failure_exits_with_two() {
    let out = efgl(&["tate", "--p", "2", "--alpha", "-1", "--cap", "5", "--check", "coproduct", "--expect-coproduct", "x_1*x_2"]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["status"], "fail");
    assert_ne!(report["checks"][0]["residual"], "0");
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version": 1, "name": "bad", "operation": {"kind": "none"}, "extra": true}"#).unwrap();
    assert_eq!(efgl(&["run", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(efgl(&["run", "no-such-scenario"]).status.code(), Some(1));
    assert_eq!(efgl(&["tate", "--p", "2", "--alpha", "2", "--cap", "5"]).status.code(), Some(1));
    assert_eq!(efgl(&["z2def", "--verify", "nonsense"]).status.code(), Some(1));
}

#[test]
fn run_writes_to_out_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"version": 1, "name": "mine", "operation": {"kind": "z2-deformation", "cap": 6}, "checks": ["q0", "correction"]}"#,
    )
    .unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let status = efgl(&["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
        assert_eq!(status.code(), Some(0));
    }
    let read = |p: &std::path::Path| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (a, b) = (read(&out_a), read(&out_b));
    assert_eq!(a["checksum"], b["checksum"]);
    assert_eq!(a["checks"], b["checks"]);
    assert_eq!(a["scenario"]["name"], "mine");
}

#[test]
fn parallel_run_keeps_order() {
    let names = ["tate-p2", "empty-checks", "multiplicative-law", "z2def-full"];
    let mut args = vec!["run", "--jobs", "3"];
    args.extend(names);
    let out = efgl(&args);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&out);
    let got: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["scenario"]["name"].as_str().unwrap()).collect();
    assert_eq!(got, names);
    let serial = json(&efgl(&["run", "tate-p2"]));
    assert_eq!(serial["checksum"], reports[0]["checksum"]);
}

#[test]
fn empty_checks_pass() {
    let out = efgl(&["run", "empty-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["status"], "pass");
    assert!(report["checks"].as_array().unwrap().is_empty());
}
