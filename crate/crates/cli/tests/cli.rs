use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fluidsym(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluidsym")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fluidsym(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn unknown_subcommand_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fluidsym(&["bogus"], dir.path()).status.code(), Some(2));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("grid.toml", "[grid]\nn = 100\nL = 10.0\n"),
        ("syntax.toml", "[grid\n"),
        ("unknown.toml", "[grid]\nsize = 4\n"),
        ("dt.toml", "[integrator]\ndt = 0.0\nt_final = 1.0\n"),
    ] {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let o = fluidsym(&["simulate", "--config", path.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("configuration error"), "{name}");
    }
    let o = fluidsym(&["simulate", "--config", "/nonexistent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn membrane_on_compact_data_violates_the_floor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.toml");
    fs::write(&path, "[potential]\nkind = \"membrane\"\nc = 0.01\n[initial]\npreset = \"standard_compact\"\n").unwrap();
    let o = fluidsym(&["simulate", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("density floor violated"), "{}", stderr(&o));
}

#[test]
fn brackets_report_lists_all_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidsym(&["brackets"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("brackets.json")).unwrap()).unwrap();
    assert_eq!(report["data"]["entries"].as_array().unwrap().len(), 45);
    assert_eq!(report["pass"], true);
}

#[test]
fn brackets_need_the_free_potential() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidsym(&["brackets", "--potential", "conformal", "--c", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidsym(&["verify-all"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.matches("[PASS]").count(), 8, "{stdout}");
    assert!(dir.path().join("verify-all.json").exists());
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["simulate", "--t-final", "0.2", "--n", "128", "--length", "20", "--dt", "0.01"];
    for d in [&a, &b] {
        let o = fluidsym(&args, d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["drift.csv", "trajectory/manifest.json", "trajectory/slice_00000.csv", "trajectory/slice_00002.csv"] {
        let read = |d: &tempfile::TempDir| fs::read(d.path().join(file)).unwrap();
        assert_eq!(read(&a), read(&b), "{file}");
    }
}

#[test]
fn conformal_charges_follow_the_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let o = fluidsym(&["charges", "--potential", "conformal", "--c", "0.01"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("charges.json")).unwrap()).unwrap();
    assert_eq!(report["data"]["expected_conserved"].as_array().unwrap().len(), 6);
}

#[test]
fn transform_writes_one_table_per_request() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/standard.toml");
    let o = fluidsym(&["transform", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["transform_0_boost.csv", "transform_1_antiboost.csv", "transform_2_c1.csv", "transform.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn transform_without_requests_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fluidsym(&["transform"], dir.path()).status.code(), Some(2));
}
