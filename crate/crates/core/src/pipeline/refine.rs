use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{cache, load_image, load_mesh, prepare_out_dir, sha256_bytes, write_image, write_opaque, write_textured_obj};
use super::{PipelineConfig, RunManifest};
use crate::blend::{blend_texture, BlendStats};
use crate::geometry::{compute_vertex_normals, Mesh};
use crate::raster::{rasterize, rasterize_uv_space, Image};
use crate::texproject::{cull_silhouette, project_views, select_texels, TexelMaps, View, ViewSet};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RefineInputs {
    pub mesh: PathBuf,
    pub coarse_texture: PathBuf,
    /// One image per configured azimuth, in configuration order.
    pub views: Vec<PathBuf>,
    /// Texel cache written by `extract`; rebuilt from the mesh when absent.
    pub texel_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RefineStats {
    pub valid_texels: usize,
    pub candidates_projected: usize,
    pub candidates_kept: usize,
    pub candidates_culled: usize,
    pub texels_with_candidates: usize,
    pub texels_selected: usize,
    pub blend: BlendStats,
}

#[derive(Debug, Clone)]
pub struct RefineOutput {
    pub refined: Image,
    /// Selected colors (coarse where nothing was selected), alpha = mask.
    pub projected: Image,
    pub mask: Vec<bool>,
    pub stats: RefineStats,
}

/// Back-projects the views onto the texels, culls the silhouette band,
/// selects the candidate closest to the coarse color and Poisson-blends the
/// result into the coarse texture. `texels` must carry coarse colors.
pub fn refine_in_memory(mesh: &Mesh, texels: &TexelMaps, views: Vec<Image>, config: &PipelineConfig) -> Result<RefineOutput> {
    let coarse = texels
        .coarse_image()
        .ok_or_else(|| Error::InvalidParameter("texel maps carry no coarse colors".into()))?;
    let cameras = config.camera.cameras()?;
    if views.len() != cameras.len() {
        return Err(Error::InvalidParameter(format!("expected {} views, got {}", cameras.len(), views.len())));
    }
    let gbuffers: Vec<_> = cameras.par_iter().map(|cam| rasterize(mesh, cam)).collect();
    let views = ViewSet::new(
        views
            .into_iter()
            .zip(cameras)
            .zip(gbuffers)
            .map(|((img, cam), gb)| View::new(img, cam, gb))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("views"))?,
    )?;
    let projected = project_views(texels, &views, config.projection.depth_eps).map_err(|e| e.in_stage("project"))?;
    let kept = cull_silhouette(&projected, texels, &views, config.projection.silhouette_threshold);
    let (selected, mask) = select_texels(&kept, texels).map_err(|e| e.in_stage("select"))?;
    let (refined, blend) =
        blend_texture(&selected, &mask, &coarse, texels, config.solver.params()).map_err(|e| e.in_stage("blend"))?;
    let stats = RefineStats {
        valid_texels: texels.valid_count(),
        candidates_projected: projected.total(),
        candidates_kept: kept.total(),
        candidates_culled: projected.total() - kept.total(),
        texels_with_candidates: kept.texels_with_candidates(),
        texels_selected: mask.iter().filter(|&&m| m).count(),
        blend,
    };
    Ok(RefineOutput {
        refined,
        projected: selected,
        mask,
        stats,
    })
}

/// File-level refine: writes `refined_texture.png`, `refined.obj` (+ `.mtl`),
/// `projected.png` (alpha = selection mask) and the manifest.
pub fn refine(inputs: &RefineInputs, config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let mut manifest = RunManifest::new("refine", config);
    let mut mesh = load_mesh(&mut manifest, &inputs.mesh)?;
    if !mesh.has_uvs() || !mesh.has_charts() {
        return Err(Error::InvalidParameter("refine needs a mesh with a UV atlas and chart groups".into()));
    }
    if !mesh.has_normals() {
        mesh = compute_vertex_normals(&mesh).0;
    }
    let coarse = load_image(&mut manifest, &inputs.coarse_texture)?;
    if coarse.width != coarse.height {
        return Err(Error::InvalidParameter("coarse texture must be square".into()));
    }
    let res = coarse.width;
    if res != config.atlas.resolution {
        manifest
            .warnings
            .push(format!("coarse texture is {res}x{res}; using it instead of atlas.resolution"));
    }
    let views = inputs
        .views
        .iter()
        .map(|p| load_image(&mut manifest, p))
        .collect::<Result<Vec<_>>>()?;
    prepare_out_dir(out)?;

    let mesh_bytes = std::fs::read(&inputs.mesh).map_err(|e| Error::io(&inputs.mesh, e))?;
    let mesh_hash = sha256_bytes(&mesh_bytes);
    let mut texels = None;
    if let Some(path) = &inputs.texel_cache {
        manifest.add_input(path)?;
        let (maps, hash) = cache::load(path)?;
        if hash != mesh_hash {
            manifest.warnings.push("texel cache was made for a different mesh; rebuilding".into());
        } else if maps.res != res {
            manifest.warnings.push("texel cache resolution differs from the coarse texture; rebuilding".into());
        } else {
            texels = Some(maps);
        }
    }
    let mut texels = match texels {
        Some(t) => t,
        None => manifest.time("texels", || {
            let (mut t, _) = rasterize_uv_space(&mesh, res);
            cache::quantize(&mut t);
            Ok(t)
        })?,
    };
    texels.attach_coarse(&coarse)?;

    let result = manifest.time("refine", || refine_in_memory(&mesh, &texels, views, config))?;
    // Outside the blend interior the result is the coarse texture, gutters included.
    write_opaque(&mut manifest, out, "refined_texture.png", &result.refined)?;
    write_image(&mut manifest, out, "projected.png", &result.projected)?;
    write_textured_obj(&mut manifest, out, "refined", &mesh, Some("refined_texture.png"))?;
    manifest.stat("texels", &result.stats);
    manifest.finish(out)
}
