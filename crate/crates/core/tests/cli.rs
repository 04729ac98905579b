use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use civic_core::qol::ModelFile;
use civic_core::report::{read_csv_artifact, AuditHeader};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn civic(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_civic"))
        .arg("--data")
        .arg(fixture("survey.csv"))
        .arg("--schema")
        .arg(fixture("schema.json"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CIVIC_DATA")
        .env_remove("CIVIC_SCHEMA")
        .env_remove("CIVIC_OUT")
        .env_remove("CIVIC_SEED")
        .env_remove("CIVIC_FORMAT")
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> Vec<PathBuf> {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap().lines().map(PathBuf::from).collect()
}

fn error_record(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("json error record");
    serde_json::from_str(line).unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("pipeline.json");
    fs::write(&p, r#"{"mlp": {"epochs": 15, "hidden_units": 8}}"#).unwrap();
    p
}

fn validator() -> jsonschema::Validator {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/artifact.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn check_json(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let errors: Vec<String> = validator().iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{}: {errors:#?}", path.display());
    let audit: AuditHeader = serde_json::from_value(v["audit"].clone()).unwrap();
    assert_eq!(audit.config_sha256, audit.config.sha256());
    v
}

fn check_csv(path: &Path) -> (AuditHeader, usize) {
    let text = fs::read_to_string(path).unwrap();
    let (audit, body) = read_csv_artifact(&text).unwrap();
    assert_eq!(audit.config_sha256, audit.config.sha256());
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let width = rdr.headers().unwrap().len();
    let mut rows = 0;
    for rec in rdr.records() {
        assert_eq!(rec.unwrap().len(), width);
        rows += 1;
    }
    (audit, rows)
}

#[test]
fn json_artifacts_match_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["ingest"],
        vec!["legitimacy", "--axis", "sectors", "--k", "3"],
        vec!["legitimacy", "--axis", "neighborhoods", "--scope", "Parking"],
        vec!["optimal-k", "--axis", "sectors"],
        vec!["optimal-k", "--axis", "neighborhoods"],
        vec!["relocation"],
        vec!["relocation", "--from", "Old Town", "--to", "Station"],
        vec!["train", "--features", "S", "--sampling", "none", "--config", cfg],
        vec!["significance"],
    ];
    for args in runs {
        let paths = ok(civic(&out, &args));
        assert!(!paths.is_empty(), "{args:?}");
        for p in paths {
            let v = check_json(&p);
            assert_eq!(v["audit"]["config"]["command"]["name"], args[0]);
        }
    }
}

#[test]
fn report_all_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();

    let json_out = dir.path().join("json");
    let paths = ok(civic(&json_out, &["--seed", "3", "report-all", "--config", cfg]));
    assert_eq!(paths, vec![json_out.join("report.json")]);
    let v = check_json(&paths[0]);
    assert_eq!(v["audit"]["seed"], 3);
    assert_eq!(v["data"]["classifier"]["experiments"].as_array().unwrap().len(), 6);
    // 2 samplings x 3 feature sets x (4 classes + overall)
    assert_eq!(v["data"]["classifier"]["results_table"].as_array().unwrap().len(), 30);

    let csv_out = dir.path().join("csv");
    let paths = ok(civic(&csv_out, &["--format", "csv", "--seed", "3", "report-all", "--config", cfg]));
    let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for expected in [
        "ingest_issues.csv",
        "legitimacy_sectors.csv",
        "optimal_k_neighborhoods.csv",
        "legitimacy_map_sectors.csv",
        "satisfaction.csv",
        "migration.csv",
        "rqi.csv",
        "pqi.csv",
        "rqi_global.csv",
        "classifier_results.csv",
        "classifier_roc.csv",
        "significance.csv",
        "sector_crosscheck.csv",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected} in {names:?}");
    }
    for p in &paths {
        let (audit, rows) = check_csv(p);
        assert_eq!(audit.seed, 3);
        if !p.ends_with("ingest_issues.csv") {
            assert!(rows > 0, "{} is empty", p.display());
        }
    }
    let (_, rows) = check_csv(&csv_out.join("classifier_results.csv"));
    assert_eq!(rows, 30);
}

#[test]
fn csv_subcommands_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    for args in [
        vec!["--format", "csv", "ingest"],
        vec!["--format", "csv", "legitimacy", "--k", "2"],
        vec!["--format", "csv", "optimal-k"],
        vec!["--format", "csv", "relocation"],
        vec!["--format", "csv", "significance"],
        vec!["--format", "csv", "train", "--features", "P", "--config", cfg],
    ] {
        for p in ok(civic(&out, &args)) {
            if p.extension().is_some_and(|e| e == "csv") {
                check_csv(&p);
            } else {
                check_json(&p);
            }
        }
    }
    let text = fs::read_to_string(out.join("legitimacy_sectors.csv")).unwrap();
    let (_, body) = read_csv_artifact(&text).unwrap();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    for rec in rdr.records() {
        assert_eq!(&rec.unwrap()[1], "2");
    }
    assert!(out.join("model_P_smote.json").exists());
    assert!(out.join("roc_P_smote.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let args = ["--seed", "11", "train", "--config", cfg];
    let first: Vec<(PathBuf, Vec<u8>)> =
        ok(civic(&out, &args)).into_iter().map(|p| (p.clone(), fs::read(&p).unwrap())).collect();
    let second = ok(civic(&out, &args));
    assert_eq!(second.len(), first.len());
    for (p, bytes) in first {
        assert_eq!(fs::read(&p).unwrap(), bytes, "{} changed", p.display());
    }
}

#[test]
fn seed_changes_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let a = ok(civic(&dir.path().join("a"), &["--seed", "1", "train", "--config", cfg]));
    let b = ok(civic(&dir.path().join("b"), &["--seed", "2", "train", "--config", cfg]));
    let ma = ModelFile::load(&a[0]).unwrap();
    let mb = ModelFile::load(&b[0]).unwrap();
    assert_ne!(ma.hidden.weights, mb.hidden.weights);
}

#[test]
fn model_file_loads_and_predicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = small_config(dir.path());
    let paths = ok(civic(&out, &["train", "--features", "SP", "--sampling", "smote", "--config", cfg.to_str().unwrap()]));
    let model = ModelFile::load(&paths[0]).unwrap();
    assert_eq!(model.config.epochs, 15);
    assert_eq!(model.config.hidden_units, 8);
    assert_eq!(model.hidden.shape, [8, model.columns.len()]);
    let raw = vec![2.0; model.columns.len()];
    let p = model.predict_raw(&raw).unwrap();
    assert_eq!(p.len(), 4);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(model.predict_raw(&[1.0]).is_err());
}

#[test]
fn environment_variables_supply_globals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env_out");
    let status = Command::new(env!("CARGO_BIN_EXE_civic"))
        .arg("ingest")
        .env("CIVIC_DATA", fixture("survey.csv"))
        .env("CIVIC_SCHEMA", fixture("schema.json"))
        .env("CIVIC_OUT", &out)
        .env("CIVIC_SEED", "42")
        .env("CIVIC_FORMAT", "csv")
        .output()
        .unwrap();
    let paths = ok(status);
    assert_eq!(paths, vec![out.join("ingest_issues.csv")]);
    let (audit, _) = check_csv(&paths[0]);
    assert_eq!(audit.seed, 42);
}

#[test]
fn missing_dataset_exits_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_civic"))
        .args(["--data", "/nonexistent/survey.csv", "--schema"])
        .arg(fixture("schema.json"))
        .arg("--out")
        .arg(dir.path())
        .arg("ingest")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["error"]["kind"], "data");
    assert_eq!(rec["error"]["exit_code"], 3);
    assert!(rec["error"]["message"].as_str().unwrap().contains("dataset not found"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let out = Command::new(env!("CARGO_BIN_EXE_civic"))
        .arg("--data")
        .arg(fixture("survey.csv"))
        .args(["--schema", "/nonexistent/schema.json", "--out"])
        .arg(&out_dir)
        .arg("ingest")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "config");

    let out = civic(&out_dir, &["legitimacy", "--scope", "Old Town", "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = civic(&out_dir, &["legitimacy", "--scope", "Old Town", "--k", "999"]);
    assert_eq!(out.status.code(), Some(2));
    let out = civic(&out_dir, &["--format", "xml", "ingest"]);
    assert_eq!(out.status.code(), Some(2));
    let out = civic(&out_dir, &["bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"mlp": {"epochs": 0}}"#).unwrap();
    let out = civic(&out_dir, &["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&bad, r#"{"mlp": {"epoch": 10}}"#).unwrap();
    let out = civic(&out_dir, &["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&bad, r#"{"test_fraction": 1.0}"#).unwrap();
    let out = civic(&out_dir, &["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&bad, "not json").unwrap();
    let out = civic(&out_dir, &["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_labels_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = civic(dir.path(), &["legitimacy", "--scope", "Atlantis"]);
    assert_eq!(out.status.code(), Some(3));
    let out = civic(dir.path(), &["relocation", "--from", "Atlantis"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"]["kind"], "data");
}

#[test]
fn schema_rejects_malformed_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let paths = ok(civic(dir.path(), &["significance"]));
    let good = check_json(&paths[0]);
    let v = validator();

    let mut bad = good.clone();
    bad["data"]["report"]["method"] = "wald".into();
    assert!(!v.is_valid(&bad));

    let mut bad = good.clone();
    bad["audit"]["config_sha256"] = "abc".into();
    assert!(!v.is_valid(&bad));

    let mut bad = good.clone();
    bad["data"]["report"]["features"][0]["p_value"] = 1.5.into();
    assert!(!v.is_valid(&bad));

    let mut bad = good;
    bad["artifact"] = "model".into();
    assert!(!v.is_valid(&bad));
}
