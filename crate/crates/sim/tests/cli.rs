use std::process::Command;

fn hexwall(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hexwall")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn list_and_validate_succeed() {
    let (code, text) = hexwall(&["list-scenarios"]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 4);
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/data/default_robot.toml");
    assert_eq!(hexwall(&["validate", "--config", config]).0, 0);
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "legs = 3\n").unwrap();
    assert_eq!(hexwall(&["validate", "--config", bad.to_str().unwrap()]).0, 2);
    assert_eq!(hexwall(&["run", "no_such_scenario", "--out", dir.path().to_str().unwrap()]).0, 2);
}

#[test]
fn infeasible_scenario_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fast.toml");
    let text = include_str!("../data/scenarios/walk_and_install.toml").replace("velocity = [0.1, 0.0]", "velocity = [0.25, 0.0]");
    std::fs::write(&path, text).unwrap();
    assert_eq!(hexwall(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]).0, 3);
}

#[test]
fn run_and_tables_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(hexwall(&["run", "standstill", "--out", out]).0, 0);
    assert!(dir.path().join("standstill.csv").exists() && dir.path().join("standstill.metrics.json").exists());
    let tables = dir.path().join("tables");
    assert_eq!(hexwall(&["tables", "--out", tables.to_str().unwrap()]).0, 0);
    assert_eq!(std::fs::read_dir(tables).unwrap().count(), 9);
}
