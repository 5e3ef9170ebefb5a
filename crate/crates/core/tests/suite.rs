use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use qsk::suite::{compare_golden, reports_match, run_suite, Report, RunConfig, Suite, SCHEMA_VERSION};

fn cfg(suites: &[Suite]) -> RunConfig {
    RunConfig { suites: suites.to_vec(), ..RunConfig::default() }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsk-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn empty_suite_list_passes_vacuously() {
    let r = run_suite(&cfg(&[])).unwrap();
    assert!(r.checks.is_empty());
    assert!(r.pass);
    assert_eq!(r.schema_version, SCHEMA_VERSION);
}

#[test]
fn coxeter_suite_is_fast_and_green() {
    let start = Instant::now();
    let r = run_suite(&cfg(&[Suite::Coxeter])).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(r.pass);
    assert!(r.checks.iter().all(|c| c.suite == Suite::Coxeter));
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let c = cfg(&[Suite::Coxeter, Suite::Killing, Suite::Bott]);
    let a = run_suite(&c).unwrap();
    let b = run_suite(&c).unwrap();
    assert_eq!(a.to_json_without_timing().unwrap(), b.to_json_without_timing().unwrap());
}

#[test]
fn golden_comparison() {
    let c = cfg(&[Suite::Index]);
    let report = run_suite(&c).unwrap();
    let path = scratch("index-golden.json");
    report.write(&path).unwrap();
    assert!(compare_golden(&report, &path).unwrap());
    assert_eq!(Report::read(&path).unwrap().checks.len(), report.checks.len());

    let mut flipped = report.clone();
    let entry = flipped.checks.iter_mut().find(|e| e.report.integers.contains_key("index")).unwrap();
    *entry.report.integers.get_mut("index").unwrap() *= -1;
    assert!(!reports_match(&flipped, &report));

    // The index suite draws nothing from the seed.
    let other = run_suite(&RunConfig { seed: 99, ..c }).unwrap();
    assert!(reports_match(&other, &report));
}

#[test]
fn golden_rejects_other_schema_versions() {
    let path = scratch("old-schema.json");
    let mut v: serde_json::Value = serde_json::from_str(&run_suite(&cfg(&[])).unwrap().to_json().unwrap()).unwrap();
    v["schema_version"] = serde_json::json!(SCHEMA_VERSION + 1);
    std::fs::write(&path, v.to_string()).unwrap();
    assert!(Report::read(&path).is_err());
}

#[test]
fn config_validation() {
    assert!(RunConfig::default().validate().is_ok());
    let bad = [
        RunConfig { q: vec![], ..RunConfig::default() },
        RunConfig { q: vec![0.5, 1.0], ..RunConfig::default() },
        RunConfig { n: 6, ..RunConfig::default() },
        RunConfig { m: 3, ..RunConfig::default() },
        RunConfig { fock_dim: 3, ..RunConfig::default() },
        RunConfig { rank_tol: 0.0, ..RunConfig::default() },
        RunConfig { n: 5, fock_dim: 40, ..RunConfig::default() },
        RunConfig { window: 2000, ..RunConfig::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
        assert!(run_suite(&c).is_err());
    }
}

#[test]
fn config_files_fill_defaults() {
    let path = scratch("partial.json");
    std::fs::write(&path, r#"{"q": [0.3], "suites": ["coxeter", "bott"]}"#).unwrap();
    let c = RunConfig::from_json_file(&path).unwrap();
    assert_eq!(c.q, vec![0.3]);
    assert_eq!(c.suites, vec![Suite::Coxeter, Suite::Bott]);
    assert_eq!(c.fock_dim, RunConfig::default().fock_dim);
    assert_eq!("factorize".parse::<Suite>().unwrap(), Suite::Factorization);
    assert!("nope".parse::<Suite>().is_err());
}

fn qsk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsk"))
}

#[test]
fn cli_runs_a_suite_and_compares() {
    let out = scratch("cli-coxeter.json");
    let status = qsk().args(["coxeter", "--out"]).arg(&out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let report = Report::read(&out).unwrap();
    assert!(report.pass);
    assert_eq!(report.config.suites, vec![Suite::Coxeter]);

    let cmp = qsk().arg("compare").arg(&out).arg(&out).output().unwrap();
    assert!(cmp.status.success());
    assert!(String::from_utf8_lossy(&cmp.stdout).contains("match=true"));
}

#[test]
fn cli_pair_index() {
    let out =
        qsk().args(["pair-index", "--unitary", "su2-limit", "--L", "12", "--D", "12", "--k", "-1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["index"], -1);
    let bad = qsk().args(["pair-index", "--unitary", "nope"]).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn cli_exit_codes() {
    let invalid = qsk().args(["relations", "--q", "1.5", "--out"]).arg(scratch("bad.json")).output().unwrap();
    assert_eq!(invalid.status.code(), Some(2));
    // The literal t⊗p pairing is recorded as a failing check.
    let red = qsk().args(["all", "--suite", "index", "--out"]).arg(scratch("index.json")).output().unwrap();
    assert_eq!(red.status.code(), Some(1));
}
