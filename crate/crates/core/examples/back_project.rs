//! Back-projects four rendered views of the blob character into its texture
//! atlas and prints how many candidates survive each filter.
//!
//! ```text
//! cargo run --release --example back_project -- [out_dir]
//! ```

use std::path::PathBuf;

use toonforge::geometry::{compute_vertex_normals, laplacian_smooth, normalize_to_unit_box};
use toonforge::isosurface::{bake_coarse_texture_with, generate_uv_atlas, marching_tetrahedra, sample_grid, scene};
use toonforge::pipeline::{refine_in_memory, render_views, PipelineConfig, SYNTH_DOMAIN};
use toonforge::raster::rasterize_uv_space;
use toonforge::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "back_project_out".into()));
    std::fs::create_dir_all(&out)?;

    let mut config = PipelineConfig::default();
    config.atlas.resolution = 512;
    config.camera.view_resolution = 256;
    config.synth.grid_resolution = 64;

    let n = config.synth.grid_resolution;
    let spacing = 2.0 * SYNTH_DOMAIN / (n - 1) as f64;
    let grid = sample_grid(&scene::blob_character(), [n; 3], Vec3::repeat(-SYNTH_DOMAIN), spacing)?;
    let (unit, to_unit) = normalize_to_unit_box(&marching_tetrahedra(&grid))?;
    let smooth = laplacian_smooth(&unit, config.smoothing.iterations, config.smoothing.lambda);
    let mesh = generate_uv_atlas(&compute_vertex_normals(&smooth).0, config.atlas.resolution)?;

    let (mut texels, _) = rasterize_uv_space(&mesh, config.atlas.resolution);
    let coarse = bake_coarse_texture_with(&texels, &grid, &to_unit)?.dilate(&texels.valid, 2);
    texels.attach_coarse(&coarse)?;

    let views = render_views(&mesh, &coarse, &config, &config.camera.azimuths)?;
    let result = refine_in_memory(&mesh, &texels, views, &config)?;
    let s = &result.stats;
    println!("valid texels        {}", s.valid_texels);
    println!("candidates          {}", s.candidates_projected);
    println!("  culled (oblique)  {}", s.candidates_culled);
    println!("  kept              {}", s.candidates_kept);
    println!("texels selected     {}", s.texels_selected);

    let mut projected = result.projected.clone();
    projected.alpha = result.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    projected.save_png(&out.join("projected.png"))?;
    coarse.save_png(&out.join("coarse.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
