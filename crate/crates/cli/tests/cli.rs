use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn loopforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopforge")).args(args).env_remove("LOOPFORGE_THREADS").output().unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn sample_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = loopforge(&["sample", "--graph", &cfg("triangle.json"), "--replicas", "500", "--seed", "4", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.json", "classes.csv", "trees.csv", "fits.csv", "ensemble.jsonl"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let ensemble = std::fs::read_to_string(dir.path().join("ensemble.jsonl")).unwrap();
    assert_eq!(ensemble.lines().count(), 500);
    let trees = std::fs::read_to_string(dir.path().join("trees.csv")).unwrap();
    assert_eq!(trees.lines().count(), 17);
}

#[test]
fn sample_accepts_an_order_and_rejects_a_bad_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let g = cfg("triangle.json");
    let o = loopforge(&["sample", "--graph", &g, "--replicas", "50", "--order", "c,a,b", "--out", out]);
    assert!(o.status.success());
    let o = loopforge(&["sample", "--graph", &g, "--replicas", "50", "--order", "a,a,b", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn enumerate_streams_csv_and_summary() {
    let o = loopforge(&["enumerate", "--graph", &cfg("two_vertex.json"), "--max-len", "6"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("loop,length,mult,mass,geodesic_class"));
    // one loop of each even length on two vertices
    assert_eq!(lines.count(), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 loops"));
}

#[test]
fn enumerate_rejects_oversized_requests() {
    let o = loopforge(&["enumerate", "--graph", &cfg("triangle.json"), "--max-len", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classes_prints_geodesic_and_holonomy_tables() {
    let o = loopforge(&["classes", "--graph", &cfg("triangle.json"), "--max-len", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("class_word,"));
    assert!(text.contains("\"a\",\"b\",\"c\"") || text.contains("[\"\"a\"\",\"\"b\"\",\"\"c\"\"]"), "{text}");

    let o = loopforge(&[
        "classes",
        "--graph",
        &cfg("triangle.json"),
        "--assignment",
        &cfg("s3_triangle.json"),
        "--group",
        "S_3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("class,size,mass_exact"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn classes_group_requires_assignment() {
    let o = loopforge(&["classes", "--graph", &cfg("triangle.json"), "--group", "Z_2"]);
    assert!(!o.status.success());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        format!(r#"{{"graph":{:?},"replicas":3000,"max_len":10,"seed":1}}"#, cfg("triangle.json")),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = loopforge(&["verify", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ALL PASS"));
    assert!(out.join("summary.json").exists());

    // a near-one significance level rejects this seed
    let strict = dir.path().join("strict.json");
    std::fs::write(
        &strict,
        format!(r#"{{"graph":{:?},"replicas":3000,"max_len":10,"significance":0.999}}"#, cfg("triangle.json")),
    )
    .unwrap();
    let o = loopforge(&["verify", "--config", strict.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = loopforge(&["verify", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let base = [&"enumerate"[..], "--graph", &cfg("triangle.json"), "--max-len", "4"];
    let run = |v: &str| Command::new(env!("CARGO_BIN_EXE_loopforge")).args(base).env("LOOPFORGE_THREADS", v).output().unwrap();
    assert!(run("1").status.success());
    for bad in ["0", "many"] {
        let o = run(bad);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains("LOOPFORGE_THREADS"));
    }
}
