#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use toonforge::pipeline::PipelineConfig;

/// Config small enough for the pipeline to run in well under a second.
pub fn small_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.atlas.resolution = 256;
    cfg.camera.view_resolution = 128;
    cfg.synth.grid_resolution = 40;
    cfg.eval.samples = 4000;
    cfg
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_toonforge")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn toonforge")
}

pub fn write_config(dir: &Path, cfg: &PipelineConfig) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    path
}

/// Every file under `dir`, relative and sorted.
pub fn list_files(dir: &Path) -> Vec<PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Manifest JSON with the wall-clock timings removed.
pub fn manifest_without_timings(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value.as_object_mut().unwrap().remove("timings_ms");
    value
}

/// Runs synth, extract, refine, render and eval through the CLI into `root`.
pub fn cli_pipeline(root: &Path, config: &Path, fixture: &str, threads: Option<usize>) {
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let threads = threads.map(|t| t.to_string());
    let run = |args: Vec<String>| {
        let mut full: Vec<String> = vec!["--config".into(), config.to_string_lossy().into_owned()];
        if let Some(t) = &threads {
            full.push("--threads".into());
            full.push(t.clone());
        }
        full.extend(args);
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let out = run_cli(&refs);
        assert!(
            out.status.success(),
            "{:?} failed: {}",
            refs,
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    run(s(&["synth", "--fixture", fixture, "--out", &p("gt")]));
    run(s(&["extract", "--grid", &p("gt/grid.sdfg"), "--out", &p("extract")]));
    run(s(&[
        "refine",
        "--mesh",
        &p("extract/mesh.obj"),
        "--coarse",
        &p("extract/coarse_texture.png"),
        "--views",
        &p("gt"),
        "--texels",
        &p("extract/texels.bin"),
        "--out",
        &p("refine"),
    ]));
    run(s(&[
        "render",
        "--mesh",
        &p("refine/refined.obj"),
        "--texture",
        &p("refine/refined_texture.png"),
        "--out",
        &p("render"),
    ]));
    run(s(&[
        "eval",
        "--mesh-a",
        &p("gt/gt_mesh.obj"),
        "--mesh-b",
        &p("extract/mesh.obj"),
        "--views-a",
        &p("gt"),
        "--views-b",
        &p("render"),
        "--out",
        &p("eval"),
    ]));
}
