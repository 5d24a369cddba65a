use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tracktopo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracktopo"))
        .args(args)
        .current_dir(cwd)
        .env_remove("TRACKTOPO_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const SMALL_SCENE: &str = r#"{
  "seed": 4, "target_label": "target", "n_targets": 2, "n_confusers_per_class": 2,
  "length_range": [120, 140],
  "classes": [
    {"label": "target", "dynamics": {"kind": "ballistic-oscillation", "speed": 3, "gravity": 0.002, "osc_amplitude": 1.5, "osc_period": 6}, "noise_sd": 0.2},
    {"label": "transit", "dynamics": {"kind": "linear-transit", "speed": 3}, "noise_sd": 3}
  ]
}"#;

#[test]
fn synth_run_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("scene.json"), SMALL_SCENE).unwrap();
    let out = tracktopo(&["synth", "--config", "scene.json", "--out", "scene.csv"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("scene.csv")).unwrap();
    assert!(csv.starts_with("track_id,label,frame,x,y\n"));

    let out = tracktopo(
        &["run", "--tracks", "scene.csv", "--out", "run", "--lengths", "40,30", "--methods", "persistence", "--k", "3"],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(d.join("run/confusion_L40_persistence.json").is_file());
    assert!(d.join("run/confusion_L30_persistence.json").is_file());
    assert!(!d.join("run/confusion_L40_statistic.json").exists());

    let out = tracktopo(&["export", "--manifest", "run", "--out", "plots"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(d.join("plots")).unwrap().count(), 4 * 4);
}

#[test]
fn environment_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("scene.json"), SMALL_SCENE).unwrap();
    let run = |seed: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_tracktopo"))
            .args(["synth", "--config", "scene.json", "--out", out])
            .env("TRACKTOPO_SEED", seed)
            .current_dir(d)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("9", "a.csv")), 0);
    assert_eq!(code(&run("10", "b.csv")), 0);
    assert_ne!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    fs::write(d.join("bad.json"), r#"{"k": 0}"#).unwrap();
    assert_eq!(code(&tracktopo(&["run", "--config", "bad.json", "--out", "o"], d)), 2);
    fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(code(&tracktopo(&["validate", "--config", "broken.json"], d)), 2);
    assert_eq!(code(&tracktopo(&["run", "--jobs", "0", "--out", "o"], d)), 2);
    assert_eq!(code(&tracktopo(&["run", "--methods", "wavelet", "--out", "o"], d)), 2);

    assert_eq!(code(&tracktopo(&["run", "--tracks", "missing.csv", "--out", "o"], d)), 3);
    fs::write(d.join("bad.csv"), "track_id,label,frame,x,y\na,target,0,1,oops\n").unwrap();
    let out = tracktopo(&["run", "--tracks", "bad.csv", "--out", "o"], d);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&tracktopo(&["export", "--manifest", "nowhere", "--out", "p"], d)), 3);
}

#[test]
fn validate_prints_schema_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracktopo(&["validate", "--schema"], dir.path());
    assert_eq!(code(&out), 0);
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema["properties"]["lengths"].is_object());

    fs::write(dir.path().join("c.json"), r#"{"lengths": [60], "k": 3}"#).unwrap();
    let out = tracktopo(&["validate", "--config", "c.json"], dir.path());
    assert_eq!(code(&out), 0);
    let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["k"], 3);
    assert_eq!(cfg["seed"], 7);
}
