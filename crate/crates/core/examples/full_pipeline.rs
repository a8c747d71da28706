//! Runs synth, extract, refine, render and eval back to back through the
//! library, the same way the CLI does, and prints the evaluation table.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [out_dir] [fixture]
//! ```

use std::path::PathBuf;

use toonforge::pipeline::{self, view_paths, EvalInputs, PipelineConfig, RefineInputs};

fn main() -> toonforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "full_pipeline_out".into()));
    let fixture = args.next().unwrap_or_else(|| "blob_character".into());

    let mut config = PipelineConfig::default();
    config.atlas.resolution = 512;
    config.camera.view_resolution = 256;

    let gt = root.join("gt");
    let ex = root.join("extract");
    let re = root.join("refine");
    let rn = root.join("render");

    pipeline::synth(&fixture, &config, &gt)?;
    let m = pipeline::extract(&gt.join("grid.sdfg"), &config, &ex)?;
    println!("extract: {}", serde_json::to_string(&m.stats).unwrap());

    let inputs = RefineInputs {
        mesh: ex.join("mesh.obj"),
        coarse_texture: ex.join("coarse_texture.png"),
        views: view_paths(&gt, &config),
        texel_cache: Some(ex.join("texels.bin")),
    };
    let m = pipeline::refine(&inputs, &config, &re)?;
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }

    pipeline::render(&re.join("refined.obj"), &re.join("refined_texture.png"), &[], &config, &rn)?;
    let inputs = EvalInputs {
        mesh_a: Some(gt.join("gt_mesh.obj")),
        mesh_b: Some(ex.join("mesh.obj")),
        views_a: view_paths(&gt, &config),
        views_b: view_paths(&rn, &config),
    };
    let (report, _) = pipeline::eval(&inputs, &config, &root.join("eval"))?;
    print!("{}", report.to_csv());
    Ok(())
}
