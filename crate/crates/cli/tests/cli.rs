use std::path::Path;
use std::process::{Command, Output};

fn geopf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geopf"))
        .args(args)
        .env("GEOPF_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_run_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let traj = dir.path().join("traj.csv");
    let out = geopf(&["gen", "--class", "line-easy", "--seed", "4", "--out", path(&scene)]);
    assert!(out.status.success());
    let back = geopf::Scene::load(&scene).unwrap();
    assert_eq!(back, geopf::generate(geopf::SceneClass::LineEasy, 4).unwrap());

    let out = geopf(&["run", "--scene", path(&scene), "--planner", "geopf", "--traj", path(&traj)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verdict="), "{stdout}");
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("step,px,py,pz,vx,vy,vz,fx,fy,fz,min_dist\n"));
}

#[test]
fn gen_is_deterministic() {
    let a = geopf(&["gen", "--class", "plane-hard", "--seed", "11"]);
    let b = geopf(&["gen", "--class", "plane-hard", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let out = geopf(&[
        "bench", "--class", "empty", "--planner", "pf", "--rsp", "0.02", "--trials", "3", "--seed", "5", "--out",
        path(&csv), "--json", path(&json),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let header = rd.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let col = |name: &str| &rows[0][header.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("class"), "empty");
    assert_eq!(col("planner"), "pf");
    assert_eq!(col("r_sp"), "0.02");
    assert_eq!(col("trials"), "3");
    assert_eq!(col("seed_start"), "5");
    assert_eq!(col("seed_end"), "7");
    assert_eq!(col("success_rate"), "1");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v[0]["outcomes"].as_array().unwrap().len(), 3);
}

#[test]
fn maze_runs_every_planner() {
    for p in ["geopf", "pf", "cf"] {
        let out = geopf(&["maze", "--planner", p]);
        assert!(out.status.success(), "{p}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"start\": [0, 1, 0]}").unwrap();
    let out = geopf(&["run", "--scene", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));

    let missing = dir.path().join("missing.json");
    assert_eq!(geopf(&["run", "--scene", path(&missing)]).status.code(), Some(1));
    assert_eq!(geopf(&["bench", "--class", "empty", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(geopf(&["run", "--scene", path(&bad), "--planner", "rrt"]).status.code(), Some(2));
}
