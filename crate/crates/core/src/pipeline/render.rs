use std::path::Path;

use rayon::prelude::*;

use super::{load_image, load_mesh, prepare_out_dir, view_file_name, write_image, PipelineConfig, RunManifest};
use crate::geometry::Mesh;
use crate::raster::{rasterize, render_textured, Image};
use crate::{Error, Result};

/// Renders the textured mesh from each azimuth of the configured orbit.
pub fn render_views(mesh: &Mesh, texture: &Image, config: &PipelineConfig, azimuths: &[f64]) -> Result<Vec<Image>> {
    if !mesh.has_uvs() {
        return Err(Error::InvalidParameter("mesh has no UVs to texture with".into()));
    }
    azimuths
        .par_iter()
        .map(|&az| {
            let cam = config.camera.camera(az)?;
            Ok(render_textured(&rasterize(mesh, &cam), texture, config.render.background))
        })
        .collect()
}

/// Writes `view_{azimuth}.png` for each azimuth (the configured ones when
/// `azimuths` is empty).
pub fn render(mesh_path: &Path, texture_path: &Path, azimuths: &[f64], config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let mut manifest = RunManifest::new("render", config);
    let mesh = load_mesh(&mut manifest, mesh_path)?;
    let texture = load_image(&mut manifest, texture_path)?;
    let azimuths = if azimuths.is_empty() { &config.camera.azimuths[..] } else { azimuths };
    let images = manifest.time("render", || render_views(&mesh, &texture, config, azimuths))?;
    prepare_out_dir(out)?;
    for (az, img) in azimuths.iter().zip(&images) {
        write_image(&mut manifest, out, &view_file_name(*az), img)?;
    }
    manifest.finish(out)
}
