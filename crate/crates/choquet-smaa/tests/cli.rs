use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_smaa-choquet"));
    c.env_remove("SMAA_CHOQUET_WORKERS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const TWO_BY_TWO: &str = r#"{
  "criteria": [{"label": "g1"}, {"label": "g2"}],
  "alternatives": [{"label": "a1", "evaluations": [1, 4]}, {"label": "a2", "evaluations": [3, 2]}],
  "preferences": [PREFS]
}"#;

fn two_by_two(prefs: &str) -> String {
    TWO_BY_TWO.replace("PREFS", prefs)
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["check", fixture("students.json").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).starts_with("epsilon* = 0.1667\nverdict: compatible\n"));

    let clash = write(dir.path(), "clash.json", &two_by_two(r#""imp: g1 > g2", "imp: g2 > g1""#));
    let o = run(&["check", &clash]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict: incompatible"));

    let broken = write(dir.path(), "broken.json", &two_by_two(r#""imp: g1 > g7""#));
    let o = run(&["check", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4, column"), "{}", stderr(&o));

    let o = run(&["check", "/nonexistent/problem.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_json_report() {
    let o = run(&["check", fixture("students.json").to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["compatible"], true);
    assert_eq!(v["statements"].as_array().unwrap().len(), 5);
}

#[test]
fn rank_bundles_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture("students_comparisons.json");
    let args = |out: &Path| {
        vec![
            "rank".to_string(),
            file.to_string_lossy().into_owned(),
            "--iterations".into(),
            "2000".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            out.to_string_lossy().into_owned(),
        ]
    };
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    for out in [&one, &two] {
        let o = bin().args(args(out)).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in [
        "results.json",
        "rank_acceptability.csv",
        "preference_strict.csv",
        "preference_indifference.csv",
        "central_capacities.csv",
        "barycenter.csv",
        "extreme_ranks.csv",
    ] {
        assert_eq!(fs::read(one.join(name)).unwrap(), fs::read(two.join(name)).unwrap(), "{name}");
    }
    let ranks = fs::read_to_string(one.join("rank_acceptability.csv")).unwrap();
    assert_eq!(ranks.lines().count(), 19);

    let o = run(&["rerun", one.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("reproduced: identical"));
}

#[test]
fn worker_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture("students.json");
    let out = |name: &str, workers: Option<&str>| {
        let target = dir.path().join(name);
        let mut c = bin();
        c.args(["rank", file.to_str().unwrap(), "--iterations", "600", "--out", target.to_str().unwrap()]);
        if let Some(w) = workers {
            c.env("SMAA_CHOQUET_WORKERS", w);
        }
        assert!(c.output().unwrap().status.success());
        let v: serde_json::Value = serde_json::from_slice(&fs::read(target.join("results.json")).unwrap()).unwrap();
        v["metadata"]["config"]["workers"].as_u64().unwrap()
    };
    assert_eq!(out("default", None), 1);
    assert_eq!(out("three", Some("3")), 3);
}

#[test]
fn single_alternative() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "one.json",
        r#"{"criteria": [{"label": "g1"}, {"label": "g2"}], "alternatives": [{"label": "only", "evaluations": [1, 2]}]}"#,
    );
    let o = run(&["rank", &p, "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("alternative,b1\nonly,100.00\n"));
}

#[test]
fn minimized_criteria_need_scale_search() {
    let cars = fixture("cars.json");
    let o = run(&["rank", cars.to_str().unwrap(), "--scale-mode", "given"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("minimized"));
}

#[test]
fn incompatible_rank_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "clash.json", &two_by_two(r#""imp: g1 > g2", "imp: g2 > g1""#));
    let o = run(&["rank", &p, "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scale_search_writes_a_reusable_scale() {
    let dir = tempfile::tempdir().unwrap();
    let cars = fixture("cars.json");
    let out = dir.path().join("scale");
    let o =
        run(&["scale", cars.to_str().unwrap(), "--candidates", "50", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("winner: candidate "));
    let scale_file = out.join("scale.json");
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&scale_file).unwrap()).unwrap();
    assert_eq!(v["candidates"], 50);
    assert_eq!(v["evaluations"].as_array().unwrap().len(), 10);

    let bundle = dir.path().join("bundle");
    let o = run(&[
        "rank",
        cars.to_str().unwrap(),
        "--scale",
        scale_file.to_str().unwrap(),
        "--iterations",
        "500",
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let scaled = fs::read_to_string(bundle.join("scale.csv")).unwrap();
    assert!(scaled.starts_with("alternative,price,acceleration,max speed,consumption\na1,"));
}

#[test]
fn scale_search_exits_one_when_every_scale_fails() {
    // a2 dominates a1, and every monotone scale keeps it that way.
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "dominated.json", &two_by_two(r#""alt: a1 > a2""#).replace("[3, 2]", "[3, 5]"));
    let o = run(&["scale", &p, "--candidates", "30"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn import_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "m.csv", "car,price,speed\ndirection,min,max\nx,100,150..160\ny,90,170\n");
    let prefs = write(dir.path(), "prefs.txt", "# elicited\nalt: x > y\n\n");
    let out = dir.path().join("problem.json");
    let o = run(&["import", &csv, "--preferences", &prefs, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["criteria"][0]["direction"], "minimize");
    assert_eq!(v["alternatives"][0]["evaluations"][1], serde_json::json!([150.0, 160.0]));
    assert_eq!(v["preferences"], serde_json::json!(["alt: x > y"]));

    let bad = write(dir.path(), "bad.csv", "car,price\nx,cheap\n");
    assert_eq!(run(&["import", &bad]).status.code(), Some(2));
}
