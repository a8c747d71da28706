use std::path::Path;

use super::{prepare_out_dir, write_image, write_texture, write_textured_obj, PipelineConfig, RunManifest};
use crate::geometry::{compute_vertex_normals, laplacian_smooth, normalize_to_unit_box};
use crate::isosurface::{generate_uv_atlas, marching_tetrahedra, sample_grid, scene};
use crate::raster::{rasterize, rasterize_uv_space, Image};
use crate::{Error, Result, Vec3};

/// Half-width of the cube the fixtures are sampled over.
pub const SYNTH_DOMAIN: f64 = 0.55;

/// Generates ground truth for an analytic fixture: the SDF + color grid, the
/// extracted and normalized mesh with an analytic texture, and the four
/// canonical views colored by evaluating the fixture at each visible point.
///
/// The mesh goes through the same smoothing as `extract`, so views rendered
/// from an extracted mesh share its silhouette and differ only in texture.
pub fn synth(fixture: &str, config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let scene = scene::fixture(fixture)?;
    prepare_out_dir(out)?;
    let mut manifest = RunManifest::new("synth", config);
    manifest.stat("fixture", fixture);

    let n = config.synth.grid_resolution;
    let spacing = 2.0 * SYNTH_DOMAIN / (n - 1) as f64;
    let grid = manifest.time("sample", || sample_grid(&scene, [n; 3], Vec3::repeat(-SYNTH_DOMAIN), spacing))?;
    grid.save(&out.join("grid.sdfg"))?;
    manifest.record_output(out, "grid.sdfg")?;

    let res = config.atlas.resolution;
    let (mesh, to_unit) = manifest.time("mesh", || {
        let raw = marching_tetrahedra(&grid);
        if raw.is_empty() {
            return Err(Error::NoSurfaceCrossing);
        }
        let (unit, xf) = normalize_to_unit_box(&raw)?;
        let smoothed = laplacian_smooth(&unit, config.smoothing.iterations, config.smoothing.lambda);
        let (with_normals, _) = compute_vertex_normals(&smoothed);
        Ok((generate_uv_atlas(&with_normals, res)?, xf))
    })?;
    manifest.stat("vertices", mesh.positions.len());
    manifest.stat("triangles", mesh.triangles.len());
    manifest.stat("unit_box_transform", to_unit);

    let texture = manifest.time("texture", || {
        let (texels, _) = rasterize_uv_space(&mesh, res);
        let rgb = crate::numeric::par_map(texels.len(), |i| {
            if texels.valid[i] {
                scene.color(&to_unit.invert(&texels.position[i]))
            } else {
                [0.0; 3]
            }
        });
        let img = Image {
            width: res,
            height: res,
            rgb,
            alpha: vec![1.0; res * res],
        };
        Ok((img, texels.valid))
    })?;
    write_texture(&mut manifest, out, "gt_texture.png", &texture.0, &texture.1)?;
    write_textured_obj(&mut manifest, out, "gt_mesh", &mesh, Some("gt_texture.png"))?;

    let views = manifest.time("views", || {
        config
            .camera
            .azimuths
            .iter()
            .map(|&az| {
                let cam = config.camera.camera(az)?;
                let gb = rasterize(&mesh, &cam);
                let (w, h) = cam.resolution();
                let mut img = Image::new(w, h, config.render.background, 0.0);
                for i in 0..w * h {
                    if gb.covered(i) {
                        img.rgb[i] = scene.color(&to_unit.invert(&gb.position[i]));
                        img.alpha[i] = 1.0;
                    }
                }
                Ok((az, img))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (az, img) in &views {
        write_image(&mut manifest, out, &super::view_file_name(*az), img)?;
    }
    manifest.finish(out)
}
