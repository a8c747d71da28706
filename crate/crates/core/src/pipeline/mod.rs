//! Command-level orchestration: configuration, run manifests, the texel cache
//! sidecar and the `synth`, `extract`, `refine`, `render`, `eval` and
//! `schedule` commands. Every command writes into its own output directory
//! and finishes with a `manifest.json` listing inputs, outputs and timings.

pub mod cache;
mod config;
mod eval;
mod extract;
mod manifest;
mod refine;
mod render;
mod schedule;
mod synth;

use std::path::{Path, PathBuf};

pub use config::{
    AtlasConfig, CameraConfig, EvalConfig, PipelineConfig, ProjectionConfig, RenderConfig, SmoothingConfig,
    SolverConfig, SynthConfig,
};
pub use eval::{eval, evaluate, EvalInputs, EvalReport, MeshRow, ViewRow};
pub use extract::extract;
pub use manifest::{sha256_bytes, sha256_file, sha256_hex, FileRecord, RunManifest, MANIFEST_NAME};
pub use refine::{refine, refine_in_memory, RefineInputs, RefineOutput};
pub use render::{render, render_views};
pub use schedule::{schedule, ScheduleParams};
pub use synth::{synth, SYNTH_DOMAIN};

use crate::geometry::{obj, Mesh};
use crate::raster::Image;
use crate::{Error, Result};

/// Passes of gutter dilation applied to written textures.
const DILATE_PASSES: usize = 2;

/// `view_{azimuth}.png`, with integral azimuths printed without a fraction.
pub fn view_file_name(azimuth_deg: f64) -> String {
    if azimuth_deg.fract() == 0.0 && azimuth_deg.abs() < 1e9 {
        format!("view_{}.png", azimuth_deg as i64)
    } else {
        format!("view_{azimuth_deg}.png")
    }
}

/// View image paths inside `dir`, in configured azimuth order.
pub fn view_paths(dir: &Path, config: &PipelineConfig) -> Vec<PathBuf> {
    config.camera.azimuths.iter().map(|&a| dir.join(view_file_name(a))).collect()
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Writes a texture with gutters dilated from `valid` and full alpha.
fn write_texture(manifest: &mut RunManifest, out: &Path, name: &str, image: &Image, valid: &[bool]) -> Result<()> {
    let mut img = image.dilate(valid, DILATE_PASSES);
    img.alpha.iter_mut().for_each(|a| *a = 1.0);
    img.save_png(&out.join(name))?;
    manifest.record_output(out, name)
}

/// Writes a texture as is, with full alpha.
fn write_opaque(manifest: &mut RunManifest, out: &Path, name: &str, image: &Image) -> Result<()> {
    let mut img = image.clone();
    img.alpha.iter_mut().for_each(|a| *a = 1.0);
    write_image(manifest, out, name, &img)
}

fn write_image(manifest: &mut RunManifest, out: &Path, name: &str, image: &Image) -> Result<()> {
    image.save_png(&out.join(name))?;
    manifest.record_output(out, name)
}

/// Writes `name.obj` referencing `name.mtl`, whose diffuse map is `texture`.
fn write_textured_obj(manifest: &mut RunManifest, out: &Path, name: &str, mesh: &Mesh, texture: Option<&str>) -> Result<String> {
    let mtl = format!("{name}.mtl");
    let text = match texture {
        Some(tex) => {
            let mtl_text = format!("newmtl {name}\nKa 1 1 1\nKd 1 1 1\nmap_Kd {tex}\n");
            manifest.write_output(out, &mtl, mtl_text.as_bytes())?;
            obj::to_obj_string(mesh, Some((&mtl, name)))
        }
        None => obj::to_obj_string(mesh, None),
    };
    manifest.write_output(out, &format!("{name}.obj"), text.as_bytes())?;
    Ok(text)
}

fn load_mesh(manifest: &mut RunManifest, path: &Path) -> Result<Mesh> {
    manifest.add_input(path)?;
    obj::read_obj(path)
}

fn load_image(manifest: &mut RunManifest, path: &Path) -> Result<Image> {
    manifest.add_input(path)?;
    Image::load_png(path)
}
