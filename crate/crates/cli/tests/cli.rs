use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn mpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn validate_exit_codes() {
    let ok = mpath(&["validate", "--input", s(&data("six_node.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("status: ok"));

    let path = mpath(&["validate", "--input", s(&data("path3.json"))]);
    assert_eq!(path.status.code(), Some(1));
    assert!(stdout(&path).contains("nodes with degree below M: 0, 2"));

    let split = mpath(&["validate", "--input", s(&data("disconnected.json"))]);
    assert_eq!(split.status.code(), Some(1));
    assert!(stdout(&split).contains("connected: no"));
}

#[test]
fn missing_or_malformed_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"nodes": 3, "edges": [], "target": 0.1, "colour": 1}"#).unwrap();
    assert_eq!(mpath(&["validate", "--input", s(&bad)]).status.code(), Some(2));
    assert_eq!(mpath(&["route", "--input", s(&dir.path().join("none.json"))]).status.code(), Some(2));
}

#[test]
fn route_six_node_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = mpath(&["route", "--input", s(&data("six_node.json")), "--out-dir", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read_dir_files(&a), read_dir_files(&b));

    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().skip(1).collect();
    assert_eq!(rows.len(), 80);
    assert!(rows[79].ends_with(",0.01,0,converged"));

    let text = fs::read_to_string(a.join("routing_list.txt")).unwrap();
    assert!(text.contains("{(0, 1, 4), (0, 3, 2, 5, 4)}: 0.1,"));
    assert_eq!(text.lines().count(), 10);

    let matrix = fs::read_to_string(a.join("effective_matrix.csv")).unwrap();
    let cells: Vec<Vec<&str>> = matrix.lines().skip(1).map(|l| l.split(',').skip(1).collect()).collect();
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(cells[i][j], cells[j][i]);
        }
    }
    assert_eq!(cells[0][1], "0.4");
    assert_eq!(cells[0][5], "0.1");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&str> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["path"].as_str().unwrap())
        .collect();
    for name in listed {
        assert!(a.join(name).is_file(), "{name} missing");
    }
    assert_eq!(manifest["seed"], 0);
    assert!(manifest["version"].is_string());
}

#[test]
fn manifest_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = mpath(&[
        "route",
        "--input",
        s(&data("ten_node.json")),
        "--delta-r",
        "0.05",
        "--seed",
        "4",
        "--out-dir",
        s(&a),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = mpath(&["route", "--manifest", s(&a.join("manifest.json")), "--out-dir", s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_dir_files(&a), read_dir_files(&b));
}

#[test]
fn ten_node_plateaus() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpath(&["route", "--input", s(&data("ten_node.json")), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
    let delta: f64 = last[last.len() - 2].parse().unwrap();
    let reason = last[last.len() - 1];
    assert!(delta > 0.5 && delta < 1.0, "plateau {delta}");
    assert_ne!(reason, "converged");
}

#[test]
fn sweep_writes_one_directory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpath(&[
        "route",
        "--input",
        s(&data("six_node.json")),
        "--sweep",
        "0.01@0,0.005@1,0.001",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    let iters: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(iters, ["80", "160", "800"]);
    for sub in ["dr0.01_seed0", "dr0.005_seed1", "dr0.001_seed0"] {
        assert!(dir.path().join(sub).join("manifest.json").is_file());
    }
}

#[test]
fn paths_listing() {
    let o = mpath(&["paths", "--input", s(&data("walkthrough_5node.json")), "1", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut d: Vec<String> = out
        .lines()
        .filter_map(|l| l.split(", D = ").nth(1))
        .map(|rest| rest.split(',').next().unwrap().to_string())
        .collect();
    d.sort();
    let mut want: Vec<String> = ["-0.2", "-0.1", "-0.2", "-0.1", "-0.3", "-0.2", "-0.2"]
        .iter()
        .map(|x| x.to_string())
        .collect();
    want.sort();
    assert_eq!(d, want);

    let single = mpath(&["paths", "--input", s(&data("fan_5node.json")), "0", "1", "--m", "1"]);
    assert!(stdout(&single).contains("    {(0, 1)}, D = -0.9, hops = 1"));

    let none = mpath(&["paths", "--input", s(&data("path3.json")), "0", "2"]);
    assert_eq!(none.status.code(), Some(0));
    assert!(stdout(&none).contains("notice:"));
}

#[test]
fn simulate_six_node() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpath(&["route", "--input", s(&data("six_node.json")), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let o = mpath(&[
        "simulate",
        "--input",
        s(&data("six_node.json")),
        "--routing",
        s(&dir.path().join("routing_list.json")),
        "--tau",
        "100",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("keys agree: yes"));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulation_report.json")).unwrap()).unwrap();
    let pairs = report["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 15);
    for p in pairs {
        assert_eq!(p["agree"], true);
        if p["direct"] == false {
            assert_eq!(p["bits_at_low"], 10_000);
        }
    }
}

#[test]
fn simulate_compromise() {
    let fan = data("fan_5node.json");
    let o = mpath(&["simulate", "--input", s(&fan), "--tau", "100", "--compromise", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("(1, 3)")).unwrap();
    assert!(row.ends_with("secure"), "{row}");

    let o = mpath(&["simulate", "--input", s(&fan), "--tau", "100", "--compromise", "0,1,2,3,4"]);
    let out = stdout(&o);
    let remote: Vec<&str> = out.lines().filter(|l| l.contains(" remote ")).collect();
    assert_eq!(remote.len(), 4);
    assert!(remote.iter().all(|l| l.ends_with("fully_leaked")));
}

#[test]
fn simulate_rejects_foreign_routing_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpath(&["route", "--input", s(&data("six_node.json")), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let o = mpath(&[
        "simulate",
        "--input",
        s(&data("fan_5node.json")),
        "--routing",
        s(&dir.path().join("routing_list.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
