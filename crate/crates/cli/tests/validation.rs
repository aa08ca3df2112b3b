use piston_cli::checks::response_check;
use piston_cli::report::Report;
use piston_cli::{exit_code, ValidationFailed, EXIT_CONFIG, EXIT_RESOURCE, EXIT_VALIDATION};
use piston_core::Execution;

#[test]
fn injected_fault_is_flagged() {
    let clean = response_check(0.0, Execution::default()).unwrap();
    assert!(clean.passed, "{clean:?}");
    let faulty = response_check(1e-3, Execution::default()).unwrap();
    assert!(!faulty.passed);
    let report = Report {
        checks: vec![clean, faulty],
        notes: vec![],
    };
    assert!(!report.passed());
    let md = report.markdown();
    assert!(md.contains("FAIL"));
    assert!(md.contains("Overall: **FAIL** (1 of 2"));
}

#[test]
fn exit_codes() {
    let v: anyhow::Error = ValidationFailed(vec!["x".into()]).into();
    assert_eq!(exit_code(&v), EXIT_VALIDATION);
    let cap: anyhow::Error = piston_core::Error::DimensionCap {
        dimension: 10,
        cap: 5,
    }
    .into();
    assert_eq!(exit_code(&cap.context("running")), EXIT_RESOURCE);
    let parse: anyhow::Error = piston_core::Error::Parse {
        line: 1,
        message: "x".into(),
    }
    .into();
    assert_eq!(exit_code(&parse), EXIT_CONFIG);
}
