use std::process::Command;

use swarmgrid::harness::{four_uav_example, read_csv, write_scenario};

fn swarmgrid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarmgrid"))
}

#[test]
fn run_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("four.json");
    let trace = dir.path().join("four.jsonl");
    write_scenario(&four_uav_example(), &scenario).unwrap();
    let out = swarmgrid().arg("run").arg("--scenario").arg(&scenario).arg("--trace").arg(&trace).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("algorithm=proposed") && stdout.contains("NC=0"), "{stdout}");

    let out = swarmgrid().arg("replay").arg("--trace").arg(&trace).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("tick 1\n"));
    assert!(text.contains("tick 5\n"));
}

#[test]
fn experiment_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let out = swarmgrid()
            .args(["experiment", "--id", "1", "--runs", "3", "--seed", "5", "--no-timing", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let rows = read_csv(&files[0][..]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.t_ms == 0.0 && r.nc == 0));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = swarmgrid().arg("run").arg("--scenario").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = swarmgrid().args(["experiment", "--id", "7", "--out", "x.csv"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn timeout_exits_two() {
    use swarmgrid::engine::{AreaSpec, DroneSpec, SimConfig};
    use swarmgrid::world::Cell;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walled.json");
    let start = Cell::new(2, 2, 2);
    let mut cfg = SimConfig::new(AreaSpec::cube(5), vec![DroneSpec { start, dest: Cell::new(0, 0, 0) }]);
    cfg.static_obstacles = swarmgrid::Area::cube(5).unwrap().neighbors(start).unwrap();
    cfg.max_ticks = Some(30);
    write_scenario(&cfg, &path).unwrap();
    let out = swarmgrid().arg("run").arg("--scenario").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
