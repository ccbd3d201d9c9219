use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_echoplace"))
}

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn baseline_from_volume() {
    let o = run(&["baseline", "--volume", "131.49"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("T60 = 0.540 s"), "{s}");
    assert!(s.contains("STI = 0.708"), "{s}");
}

#[test]
fn baseline_from_reverberation_time() {
    let o = run(&["baseline", "--t60", "1.0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("STI = 0.590"), "{}", stdout(&o));
}

#[test]
fn baseline_rejects_volumes_outside_the_model() {
    let o = run(&["baseline", "--volume", "1000"]);
    assert_eq!(o.status.code(), Some(8));
}

#[test]
fn missing_config_exits_with_its_own_code() {
    let o = run(&["validate", "--config", "/nonexistent/scene.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["optimize", "--config", "/nonexistent/scene.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_config_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"mesh\": ").unwrap();
    let o = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn shipped_scenes_validate() {
    for name in ["two_rooms.json", "partition.json"] {
        let o = run(&["validate", "--config", scene(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("ok"));
    }
}

#[test]
fn invalid_scene_lists_problems() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scene("partition.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["sources"][0]["box"]["max"] = serde_json::json!([20.0, 2.0, 1.5]);
    doc["mesh"]["triangles"][0]["material"] = serde_json::json!("unobtainium");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let all = format!("{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(all.contains("unobtainium"), "{all}");
}

fn optimize_cheap(out: &Path, seed: &str) -> Output {
    let config = scene("partition.json");
    run(&[
        "optimize",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        seed,
        "--out",
        out.to_str().unwrap(),
        "--spacing",
        "0.5",
        "--rays",
        "300",
        "--geometric-only",
    ])
}

#[test]
fn optimize_is_deterministic_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = optimize_cheap(out, "7");
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["trace.csv", "candidates.csv", "sources.csv", "report.json", "optimum.obj"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert!(!x.is_empty(), "{file}");
        assert_eq!(x, y, "{file} differs between identical runs");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["wave_runs"], 0);
    assert!(report["best"]["objective"].as_f64().unwrap() >= report["initial"]["objective"].as_f64().unwrap());
    let trace = std::fs::read_to_string(a.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), report["iterations"].as_u64().unwrap() as usize + 2);
}

#[test]
fn field_map_covers_the_listener_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let config = scene("partition.json");
    let o = run(&[
        "field-map",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--spacing",
        "1.0",
        "--rays",
        "300",
        "--geometric-only",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("field.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let q: f64 = r[3].parse().unwrap();
        assert!((0.0..=4.0).contains(&q), "objective {q} exceeds the total source weight");
    }
}

#[test]
fn sti_of_a_listener_outside_the_air_is_an_argument_error() {
    let config = scene("partition.json");
    let o = run(&["sti", "--config", config.to_str().unwrap(), "--listener", "9,9,9", "--geometric-only"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = run(&["baseline", "--pair", "1,1,1:2,2,2"]);
    assert_eq!(o.status.code(), Some(2));
}
