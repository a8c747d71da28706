//! Builds a textured capsule (atlas plus baked coarse texture) and renders it
//! from the four orbit cameras into PNGs.
//!
//! ```text
//! cargo run --release --example render_views -- [out_dir]
//! ```

use std::path::PathBuf;

use toonforge::geometry::{compute_vertex_normals, normalize_to_unit_box};
use toonforge::isosurface::{bake_coarse_texture_with, generate_uv_atlas, marching_tetrahedra, sample_grid, scene};
use toonforge::pipeline::{render_views, view_file_name, PipelineConfig};
use toonforge::raster::rasterize_uv_space;
use toonforge::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "render_views_out".into()));
    std::fs::create_dir_all(&out)?;

    let mut config = PipelineConfig::default();
    config.atlas.resolution = 512;
    config.camera.view_resolution = 256;

    let n = 48;
    let grid = sample_grid(&scene::capsule_fixture(), [n; 3], Vec3::repeat(-0.5), 1.0 / (n - 1) as f64)?;
    let (unit, to_unit) = normalize_to_unit_box(&marching_tetrahedra(&grid))?;
    let mesh = generate_uv_atlas(&compute_vertex_normals(&unit).0, config.atlas.resolution)?;
    let (texels, _) = rasterize_uv_space(&mesh, config.atlas.resolution);
    let texture = bake_coarse_texture_with(&texels, &grid, &to_unit)?.dilate(&texels.valid, 2);

    let azimuths = config.camera.azimuths.clone();
    for (az, view) in azimuths.iter().zip(render_views(&mesh, &texture, &config, &azimuths)?) {
        let path = out.join(view_file_name(*az));
        view.save_png(&path)?;
        let covered = view.alpha.iter().filter(|&&a| a > 0.5).count();
        println!("{} ({covered} covered pixels)", path.display());
    }
    Ok(())
}
