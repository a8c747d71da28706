mod common;

use common::{run_cli, small_config, write_config};
use tempfile::tempdir;

fn code(out: &std::process::Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &std::path::Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    let out = run_cli(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["synth", "extract", "refine", "render", "eval", "schedule"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
    assert_eq!(code(&run_cli(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run_cli(&[])), 2);
    assert_eq!(code(&run_cli(&["frobnicate"])), 2);
    assert_eq!(code(&run_cli(&["extract"])), 2);
    assert_eq!(code(&run_cli(&["schedule", "--steps", "many"])), 2);
    assert_eq!(code(&run_cli(&["eval", "--mesh-a", "a.obj"])), 2);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempdir().unwrap();
    let out = s(&dir.path().join("o"));
    let r = run_cli(&["synth", "--fixture", "teapot", "--out", &out]);
    assert_eq!(code(&r), 2, "{}", String::from_utf8_lossy(&r.stderr));

    let missing = s(&dir.path().join("nope.sdfg"));
    assert_eq!(code(&run_cli(&["extract", "--grid", &missing, "--out", &out])), 2);

    assert_eq!(code(&run_cli(&["--threads", "0", "schedule", "--out", &out])), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = \"x\"\n").unwrap();
    assert_eq!(code(&run_cli(&["--config", &s(&bad), "schedule", "--out", &out])), 2);

    assert_eq!(
        code(&run_cli(&["schedule", "--steps", "10", "--beta-start", "0.5", "--beta-end", "0.1", "--out", &out])),
        2
    );
}

#[test]
fn solver_budget_exhaustion_exits_three() {
    let dir = tempdir().unwrap();
    let mut cfg = small_config();
    let good = write_config(&dir.path().join("good"), &cfg);
    cfg.solver.max_iterations = Some(1);
    let starved = write_config(&dir.path().join("starved"), &cfg);
    let p = |x: &str| s(&dir.path().join(x));

    for args in [
        vec!["--config", &s(&good), "synth", "--out", &p("gt")],
        vec!["--config", &s(&good), "extract", "--grid", &p("gt/grid.sdfg"), "--out", &p("ex")],
    ] {
        assert_eq!(code(&run_cli(&args)), 0);
    }
    let r = run_cli(&[
        "--config",
        &s(&starved),
        "refine",
        "--mesh",
        &p("ex/mesh.obj"),
        "--coarse",
        &p("ex/coarse_texture.png"),
        "--views",
        &p("gt"),
        "--out",
        &p("ref"),
    ]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn schedule_writes_csv() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("sched");
    let r = run_cli(&["schedule", "--out", &s(&out)]);
    assert_eq!(code(&r), 0);
    let csv = std::fs::read_to_string(out.join("schedule.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[1000], "999,1,0,0");

    let r = run_cli(&["schedule", "--steps", "50", "--no-zero-snr", "--out", &s(&out)]);
    assert_eq!(code(&r), 0);
    let csv = std::fs::read_to_string(out.join("schedule.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(!csv.lines().last().unwrap().ends_with(",0,0"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempdir().unwrap();
    let mut cfg = small_config();
    cfg.seed = 11;
    let config = write_config(dir.path(), &cfg);
    let out = dir.path().join("s");
    let r = run_cli(&["--config", &s(&config), "--seed", "42", "schedule", "--out", &s(&out)]);
    assert_eq!(code(&r), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 42);
    assert_eq!(manifest["command"], "schedule");
}

#[test]
fn eval_prints_csv() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let p = |x: &str| s(&dir.path().join(x));
    let c = s(&config);
    assert_eq!(code(&run_cli(&["--config", &c, "synth", "--fixture", "sphere", "--out", &p("gt")])), 0);
    let r = run_cli(&[
        "--config",
        &c,
        "eval",
        "--mesh-a",
        &p("gt/gt_mesh.obj"),
        "--mesh-b",
        &p("gt/gt_mesh.obj"),
        "--views-a",
        &p("gt"),
        "--views-b",
        &p("gt"),
        "--out",
        &p("ev"),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.starts_with("kind,azimuth,chamfer,psnr,mse,ssim"));
    assert_eq!(stdout.lines().count(), 6);
    assert!(dir.path().join("ev/report.json").exists());
}
