use rayon::prelude::*;

use super::SdfGrid;
use crate::geometry::{Mesh, UnitBoxTransform};
use crate::raster::{rasterize_uv_space, Image};
use crate::texproject::TexelMaps;
use crate::{Error, Result};

/// Bakes the grid's color volume into the mesh's UV atlas.
///
/// The mesh is assumed to live in grid coordinates. Invalid texels are black
/// with alpha 0.
pub fn bake_coarse_texture(mesh: &Mesh, grid: &SdfGrid, atlas_res: usize) -> Result<Image> {
    if grid.color.is_none() {
        return Err(Error::MissingColorVolume);
    }
    let (texels, _) = rasterize_uv_space(mesh, atlas_res);
    bake_coarse_texture_with(&texels, grid, &UnitBoxTransform::IDENTITY)
}

/// Bakes from precomputed texel maps whose positions map back to grid
/// coordinates through `to_mesh.invert`.
pub fn bake_coarse_texture_with(texels: &TexelMaps, grid: &SdfGrid, to_mesh: &UnitBoxTransform) -> Result<Image> {
    if grid.color.is_none() {
        return Err(Error::MissingColorVolume);
    }
    let rgb: Vec<_> = (0..texels.len())
        .into_par_iter()
        .map(|i| {
            if texels.valid[i] {
                grid.sample_color(&to_mesh.invert(&texels.position[i])).unwrap_or([0.0; 3])
            } else {
                [0.0; 3]
            }
        })
        .collect();
    let alpha = texels.valid.iter().map(|&v| f64::from(u8::from(v))).collect();
    Ok(Image {
        width: texels.res,
        height: texels.res,
        rgb,
        alpha,
    })
}
