use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn kernctl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kernctl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("kernctl runs")
}

fn workspace(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn minimal_config_validates() {
    let dir = workspace("N = 3\nm = [0, 1, 2]\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/validate.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(dir.path().join("out/validate.manifest.json").exists());
}

#[test]
fn constraint_violation_exits_one() {
    let dir = workspace("N = 3\nm = [0, 1, 2]\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "--set", "m=[1,1,2]", "validate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("d = [1]"));
}

#[test]
fn ring_too_small_names_the_key() {
    let dir = workspace("N = 3\nm = [0, 1, 2]\nL = 10\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`L`"));
}

#[test]
fn unknown_subcommand_exits_one() {
    let dir = workspace("");
    assert_eq!(kernctl(dir.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn duplicate_key_rejected() {
    let dir = workspace("N = 3\nN = 4\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "validate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("duplicate key"));
}

#[test]
fn unknown_key_rejected() {
    let dir = workspace("N = 3\nm = [0, 1, 2]\nepsilonn = 0.1\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "validate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn kernel_csv_has_reference_cells() {
    // a = 2, b = 3
    let dir = workspace("N = 3\nm = [0, 2, 3]\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "kernel"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("out/kernel.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,dprime,value"));
    let cells: Vec<&str> = lines.collect();
    assert_eq!(cells.len(), 13 * 13);
    for want in ["1,1,3", "1,2,-3", "2,4,2", "6,6,-2.25", "2,2,0"] {
        assert!(cells.contains(&want), "missing {want}");
    }
}

#[test]
fn oracle_csv_matches_kernel_csv() {
    let dir = workspace("N = 4\nm = [0, 0, 1, -2]\n");
    for sub in ["kernel", "oracle"] {
        let out = kernctl(dir.path(), &["--config", "run.toml", sub]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("out/kernel.csv")).unwrap();
    let b = std::fs::read(dir.path().join("out/oracle.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn paths_agree_with_formula() {
    let dir = workspace("N = 3\ndim = 2\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "paths"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("out/paths.csv")).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("part,D,enumerated,formula"));
    for row in rows {
        let cols: Vec<&str> = row.rsplitn(3, ',').collect();
        assert_eq!(cols[0], cols[1], "{row}");
    }
}

#[test]
fn synthesize_writes_controls() {
    let dir = workspace("N = 4\nC = [1.5, -0.5]\n");
    let out = kernctl(dir.path(), &["--config", "run.toml", "synthesize"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let controls: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/controls.json")).unwrap()).unwrap();
    assert_eq!(controls["m"], serde_json::json!([0.0, 0.0, 1.5, -0.5]));
}

#[test]
fn replay_reproduces_simulation() {
    let dir = workspace(
        "N = 2\nm = [0, 1]\nL = 32\nepsilon = 0.25\nT = 0.25\nensemble = 4\ndt = 0.01\nseed = 3\n",
    );
    let out = kernctl(dir.path(), &["--config", "run.toml", "--out-dir", "a", "simulate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = kernctl(dir.path(), &["--out-dir", "b", "replay", "a/simulate.manifest.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["spectrum.csv", "conserved.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(name)).unwrap(),
            std::fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn replay_detects_changed_input() {
    let dir = workspace("N = 2\nm = [0, 1]\n");
    std::fs::write(dir.path().join("ctl.json"), r#"{"N": 2, "m": [0, 1]}"#).unwrap();
    std::fs::write(dir.path().join("run.toml"), "controls_file = \"ctl.json\"\n").unwrap();
    let out = kernctl(dir.path(), &["--config", "run.toml", "kernel"]);
    assert!(out.status.success(), "{}", stderr(&out));
    std::fs::write(dir.path().join("ctl.json"), r#"{"N": 2, "m": [0, 2]}"#).unwrap();
    let out = kernctl(dir.path(), &["--out-dir", "again", "replay", "out/kernel.manifest.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("changed"));
}
