//! Signed distance grids and everything needed to turn them into a UV-mapped,
//! coarsely textured mesh.
//!
//! Sign convention: negative inside, positive outside. Extracted triangles are
//! wound counter-clockwise seen from outside.

mod atlas;
mod bake;
mod grid;
mod march;
pub mod scene;

pub use atlas::{generate_uv_atlas, CHART_SPACING_TEXELS};
pub use bake::{bake_coarse_texture, bake_coarse_texture_with};
pub use grid::{read_sdfg, sample_grid, write_sdfg, SdfGrid};
pub use march::marching_tetrahedra;
pub use scene::AnalyticScene;
