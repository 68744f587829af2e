use std::path::{Path, PathBuf};

use loopforge::harness::experiment::{run_experiment, run_to_dir, ExperimentConfig};
use loopforge::Error;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(data("verify_triangle.json")).unwrap();
    cfg.replicas = 4_000;
    cfg.max_len = 10;
    cfg
}

#[test]
fn config_paths_resolve_relative_to_the_file() {
    let cfg = ExperimentConfig::load(data("verify_triangle.json")).unwrap();
    assert_eq!(cfg.graph, data("triangle.json"));
    assert_eq!(cfg.assignment, Some(data("s3_triangle.json")));
    assert_eq!(cfg.significance, 0.01);
}

#[test]
fn unknown_fields_and_bad_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"graph":"g.json","replica":5}"#).unwrap();
    assert!(matches!(ExperimentConfig::load(&p), Err(Error::ConfigParse(_))));
    let mut cfg = small_config();
    cfg.significance = 1.5;
    assert!(matches!(run_experiment(&cfg), Err(Error::ConfigParse(_))));
    let mut cfg = small_config();
    cfg.graph = dir.path().join("missing.json");
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn run_writes_all_outputs_deterministically() {
    let cfg = small_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s1 = run_to_dir(&cfg, a.path()).unwrap();
    let s2 = run_to_dir(&cfg, b.path()).unwrap();
    assert_eq!(s1, s2);
    for f in ["summary.json", "classes.csv", "trees.csv", "fits.csv", "holonomy.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let classes = std::fs::read_to_string(a.path().join("classes.csv")).unwrap();
    assert!(classes.starts_with("class_word,length,mult,mass_exact,mass_montecarlo,stderr\n"));
    assert!(classes.lines().nth(1).unwrap().starts_with("[],0,1,"));
    assert!(s1.all_pass, "{s1:#?}");
}

#[test]
fn different_seeds_differ_and_still_pass() {
    let mut cfg = small_config();
    cfg.seed = 12345;
    let r = run_experiment(&cfg).unwrap();
    let base = run_experiment(&small_config()).unwrap();
    assert_ne!(r.summary.tests, base.summary.tests);
    assert!(r.summary.all_pass);
}

#[test]
fn ensemble_dump_has_one_line_per_replica() {
    let mut cfg = small_config();
    cfg.replicas = 300;
    cfg.dump_ensemble = true;
    let dir = tempfile::tempdir().unwrap();
    run_to_dir(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ensemble.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 300);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["tree"].as_object().unwrap().len(), 3);
        assert!(v["loops"].is_array());
    }
}

#[test]
fn min_class_mass_limits_fits() {
    let dir = tempfile::tempdir().unwrap();
    let g = r#"{"vertices":["a","b","c"],"edges":[{"u":"a","v":"b","c":1.0},{"u":"b","v":"c","c":1.0},{"u":"c","v":"a","c":1.0}],"kappa":{"a":1.0,"b":1.0,"c":1.0}}"#;
    std::fs::write(dir.path().join("g.json"), g).unwrap();
    let mut cfg = ExperimentConfig::for_graph(dir.path().join("g.json"));
    cfg.replicas = 20_000;
    cfg.max_len = 8;
    let good = run_experiment(&cfg).unwrap();
    assert!(good.summary.all_pass);
    cfg.min_class_mass = 1.0;
    let r = run_experiment(&cfg).unwrap();
    assert!(r.summary.tests.iter().all(|t| t.test.name == "trees.chi_square"));
}
