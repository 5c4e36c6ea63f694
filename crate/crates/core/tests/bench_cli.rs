use std::fs;
use std::path::Path;
use std::process::Command;

use heavytail::bench::{
    median, read_records_csv, run_experiment, summarize, write_outputs, BenchError, ExperimentSpec, Scenario,
    TrialRecord, HISTOGRAM_BINS,
};

fn small_one_bit(trials: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::one_bit(false, 42);
    spec.dim = 32;
    spec.samples = vec![32];
    spec.sparsity = 3;
    spec.trials = trials;
    spec
}

fn small_covariance(trials: usize) -> ExperimentSpec {
    serde_json::from_str(&format!(
        r#"{{"scenario":"covariance_scaling","dim":3,"samples":[64,256],"trials":{trials},"seed":5}}"#
    ))
    .unwrap()
}

fn record(trial: usize, estimator: &str, value: f64) -> TrialRecord {
    TrialRecord {
        trial,
        estimator: estimator.into(),
        rel_error: value,
        lambda: Some(0.5),
        c: None,
        seed: 9,
        ms: None,
        flags: Vec::new(),
    }
}

#[test]
fn empty_records_write_a_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_one_bit(1);
    let summary = summarize(&spec, &[]);
    assert_eq!(summary.trials, 0);
    assert!(summary.estimators.is_empty());
    let (csv, json) = write_outputs(&[], &summary, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(&csv).unwrap(), "trial,estimator,rel_error,lambda,c,seed,ms\n");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["trials"], 0);
    assert!(read_records_csv(&csv).unwrap().is_empty());
}

#[test]
fn single_record_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_one_bit(1);
    let records = vec![record(0, "robust", 0.25)];
    let summary = summarize(&spec, &records);
    let (csv, json) = write_outputs(&records, &summary, &dir.path().join("nested/out")).unwrap();
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "trial,estimator,rel_error,lambda,c,seed,ms\n0,robust,0.25,0.5,,9,\n"
    );
    assert_eq!(read_records_csv(&csv).unwrap(), vec![("robust".to_string(), 0.25)]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["trials"], 1);
    let est = &v["estimators"][0];
    assert_eq!(est["median"], 0.25);
    assert_eq!(est["histogram"]["counts"].as_array().unwrap().len(), HISTOGRAM_BINS);
    assert_eq!(est["histogram"]["counts"][4], 1);
}

#[test]
fn summary_medians_match_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&small_one_bit(5), Some(2)).unwrap();
    let (csv, json) = write_outputs(&outcome.records, &outcome.summary, dir.path()).unwrap();
    let rows = read_records_csv(&csv).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let estimators = v["estimators"].as_array().unwrap();
    assert_eq!(estimators.len(), 2);
    for est in estimators {
        let name = est["estimator"].as_str().unwrap();
        let values: Vec<f64> = rows.iter().filter(|(n, _)| n == name).map(|(_, x)| *x).collect();
        assert_eq!(values.len(), 5);
        assert_eq!(est["median"].as_f64(), median(&values));
        let hist: u64 = est["histogram"]["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .sum();
        assert_eq!(hist + est["histogram"]["overflow"].as_u64().unwrap(), 5);
    }
}

#[test]
fn trials_are_independent_of_order_and_count() {
    let spec = small_covariance(6);
    let a = run_experiment(&spec, Some(1)).unwrap().records;
    let b = run_experiment(&spec, Some(3)).unwrap().records;
    assert_eq!(a, b);
    let prefix = run_experiment(&small_covariance(2), Some(2)).unwrap().records;
    assert_eq!(&a[..prefix.len()], &prefix[..]);
    assert!(a.iter().all(|r| r.seed == 5 ^ r.trial as u64));
    let names: Vec<_> = a.iter().filter(|r| r.trial == 0).map(|r| r.estimator.as_str()).collect();
    assert_eq!(names.len(), 2);
}

#[test]
fn invalid_specs_are_rejected_before_running() {
    let mut spec = small_covariance(2);
    spec.samples = vec![10];
    spec.covariance.bracket = [2.0, 1.0];
    let err = run_experiment(&spec, Some(1)).unwrap_err();
    match err {
        BenchError::Validation(v) => {
            let fields: Vec<_> = v.issues.iter().map(|i| i.field.as_str()).collect();
            assert_eq!(fields, vec!["samples", "covariance.bracket"]);
        }
        other => panic!("unexpected {other}"),
    }
    let mut lr: ExperimentSpec =
        serde_json::from_str(r#"{"scenario":"low_rank_covariance","dim":4,"rank":2,"trials":1,"seed":0}"#).unwrap();
    assert!(lr.validate().is_ok());
    lr.covariance.spectrum = vec![1.0];
    assert!(lr.validate().is_err());
    assert_eq!(lr.resolved().scenario, Scenario::LowRankCovariance);
}

fn heavytail() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heavytail"));
    cmd.env_remove("HEAVYTAIL_THREADS");
    cmd
}

fn write_spec(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL_SPEC: &str = r#"{"scenario":"covariance_scaling","dim":3,"samples":[64],"trials":3,"seed":1}"#;

#[test]
fn cli_validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_spec(dir.path(), "good.json", SMALL_SPEC);
    let bad = write_spec(
        dir.path(),
        "bad.json",
        r#"{"scenario":"covariance_scaling","dim":0,"trials":3,"seed":1}"#,
    );
    let garbled = write_spec(dir.path(), "garbled.json", "{not json");
    let unknown = write_spec(
        dir.path(),
        "unknown.json",
        r#"{"scenario":"covariance_scaling","dim":3,"trials":3,"seed":1,"extra":true}"#,
    );

    assert_eq!(heavytail().arg("validate").arg(&good).status().unwrap().code(), Some(0));
    let out = heavytail().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dim"));
    assert_eq!(heavytail().arg("validate").arg(&garbled).status().unwrap().code(), Some(2));
    assert_eq!(heavytail().arg("validate").arg(&unknown).status().unwrap().code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(heavytail().arg("validate").arg(&missing).status().unwrap().code(), Some(1));
}

#[test]
fn cli_run_writes_outputs_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", SMALL_SPEC);
    let out_a = dir.path().join("a");
    let status = heavytail()
        .args(["run".as_ref(), spec.as_os_str(), "--out".as_ref(), out_a.as_os_str()])
        .args(["--threads", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out_a.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(out_a.join("summary.json").exists());

    let out_b = dir.path().join("b");
    let status = heavytail()
        .args(["run".as_ref(), spec.as_os_str(), "--out".as_ref(), out_b.as_os_str()])
        .args(["--seed", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let other = fs::read_to_string(out_b.join("records.csv")).unwrap();
    assert_ne!(csv, other);
    assert!(other.lines().nth(1).unwrap().contains(",2,"));
}

#[test]
fn cli_runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", SMALL_SPEC);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = heavytail()
        .args(["run".as_ref(), spec.as_os_str(), "--out".as_ref(), blocker.join("sub").as_os_str()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = write_spec(
        dir.path(),
        "bad.json",
        r#"{"scenario":"covariance_scaling","dim":3,"samples":[2],"trials":3,"seed":1}"#,
    );
    let status = heavytail()
        .args(["run".as_ref(), bad.as_os_str(), "--out".as_ref(), dir.path().join("o").as_os_str()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_reads_threads_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", SMALL_SPEC);
    let run = |env: &str, out: &str| {
        heavytail()
            .env("HEAVYTAIL_THREADS", env)
            .args(["run".as_ref(), spec.as_os_str(), "--out".as_ref(), dir.path().join(out).as_os_str()])
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(run("not-a-number", "x"), Some(2));
    assert_eq!(run("1", "one"), Some(0));
    assert_eq!(run("4", "four"), Some(0));
    assert_eq!(
        fs::read(dir.path().join("one/records.csv")).unwrap(),
        fs::read(dir.path().join("four/records.csv")).unwrap()
    );
}
