use std::path::Path;

use super::{cache, prepare_out_dir, sha256_bytes, write_texture, write_textured_obj, PipelineConfig, RunManifest};
use crate::geometry::{compute_vertex_normals, laplacian_smooth, normalize_to_unit_box};
use crate::isosurface::{bake_coarse_texture_with, generate_uv_atlas, marching_tetrahedra, SdfGrid};
use crate::raster::rasterize_uv_space;
use crate::{Error, Result};

/// Grid to textured mesh: marching tetrahedra, unit-box normalization,
/// Laplacian smoothing, vertex normals, UV atlas, texel maps and (when the
/// grid carries colors) the coarse texture.
///
/// Writes `mesh.obj` (+ `mesh.mtl`), `coarse_texture.png` and the texel cache
/// `texels.bin`.
pub fn extract(grid_path: &Path, config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let mut manifest = RunManifest::new("extract", config);
    manifest.add_input(grid_path)?;
    let grid = SdfGrid::load(grid_path)?;
    prepare_out_dir(out)?;
    if let Some(w) = grid.domain_warning() {
        manifest.warnings.push(w);
    }

    let raw = manifest.time("march", || Ok(marching_tetrahedra(&grid)))?;
    if raw.is_empty() {
        return Err(Error::NoSurfaceCrossing.in_stage("march"));
    }
    let (unit, to_unit) = manifest.time("normalize", || normalize_to_unit_box(&raw))?;
    let smoothed = manifest.time("smooth", || {
        Ok(laplacian_smooth(&unit, config.smoothing.iterations, config.smoothing.lambda))
    })?;
    let (with_normals, orphans) = compute_vertex_normals(&smoothed);
    if orphans > 0 {
        manifest
            .warnings
            .push(format!("{orphans} vertices touch only degenerate triangles; their normals default to +Z"));
    }
    let res = config.atlas.resolution;
    let mesh = manifest.time("atlas", || generate_uv_atlas(&with_normals, res))?;
    let (mut texels, skipped) = manifest.time("texels", || Ok(rasterize_uv_space(&mesh, res)))?;
    cache::quantize(&mut texels);

    let has_color = grid.color.is_some();
    let obj_text = write_textured_obj(&mut manifest, out, "mesh", &mesh, has_color.then_some("coarse_texture.png"))?;
    let mesh_hash = sha256_bytes(obj_text.as_bytes());
    manifest.write_output(out, "texels.bin", &cache::encode(&texels, &mesh_hash))?;

    if has_color {
        let coarse = manifest.time("bake", || bake_coarse_texture_with(&texels, &grid, &to_unit))?;
        write_texture(&mut manifest, out, "coarse_texture.png", &coarse, &texels.valid)?;
    } else {
        manifest
            .warnings
            .push("grid has no color volume; no coarse texture written, refine needs one supplied".into());
    }

    let charts = mesh.chart_ids.iter().max().map_or(0, |m| m + 1);
    manifest.stat("vertices", mesh.positions.len());
    manifest.stat("triangles", mesh.triangles.len());
    manifest.stat("charts", charts);
    manifest.stat("valid_texels", texels.valid_count());
    manifest.stat("skipped_uv_triangles", skipped);
    manifest.stat("orphan_normals", orphans);
    manifest.stat("coarse_texture", has_color);
    manifest.stat("unit_box_transform", to_unit);
    manifest.finish(out)
}
