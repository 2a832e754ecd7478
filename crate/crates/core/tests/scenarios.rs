use efgl_core::report::Status;
use efgl_core::scenario::{bundled, run_scenario, Operation, Scenario, ScenarioError, BUNDLED};

fn body(name: &str) -> serde_json::Value {
    let mut v = serde_json::to_value(run_scenario(&bundled(name).unwrap()).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("duration_ms");
    v
}

#[test]
fn every_bundled_scenario_passes() {
    for b in BUNDLED {
        let report = run_scenario(&bundled(b.name).unwrap()).unwrap();
        let failing: Vec<_> = report.body.checks.iter().filter(|c| c.status != Status::Pass).collect();
        assert!(failing.is_empty(), "{}: {failing:#?}", b.name);
        assert_eq!(report.body.checks.is_empty(), b.name == "empty-checks", "{}", b.name);
    }
}

#[test]
fn reports_are_deterministic() {
    for name in ["tate-p2", "tate-crt", "z2def-full"] {
        assert_eq!(body(name), body(name), "{name}");
    }
}

#[test]
fn tate_p2_matches_golden_report() {
    let golden: serde_json::Value = serde_json::from_str(include_str!("golden/tate-p2.json")).unwrap();
    assert_eq!(body("tate-p2"), golden);
}

#[test]
fn every_residual_is_recorded() {
    let report = run_scenario(&bundled("z2def-full").unwrap()).unwrap();
    let names: Vec<&str> = report.body.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["q0", "xx-alpha", "correction", "iota", "rho", "z2cob58", "dichotomy", "relations"]);
    assert!(report.body.checks.iter().all(|c| c.residual == "0"));
}

#[test]
fn mathematical_failure_is_reported_with_a_witness() {
    let mut s = bundled("tate-p2").unwrap();
    if let Operation::Tate { expect, .. } = &mut s.operation {
        expect.obstruction = Some("e1_1*e1_2".into());
    }
    let report = run_scenario(&s).unwrap();
    assert_eq!(report.status(), Status::Fail);
    let check = report.check("multiplicativity").unwrap();
    assert_eq!(check.status, Status::Fail);
    assert_ne!(check.residual, "0");
    assert!(check.witness.as_deref().unwrap().contains("differs"));
}

#[test]
fn configuration_errors_name_the_clause() {
    let text = r#"{"version": 1, "name": "bad", "operation": {"kind": "lubin-tate", "heights": [3], "cap": 8}}"#;
    match Scenario::from_json(text) {
        Err(ScenarioError::Precondition(clause)) => assert!(clause.contains("2^h"), "{clause}"),
        other => panic!("expected a precondition error, got {other:?}"),
    }
    assert!(matches!(bundled("no-such-scenario"), Err(ScenarioError::UnknownBundled(_))));
}
