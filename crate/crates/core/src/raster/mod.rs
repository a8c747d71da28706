//! Deterministic CPU rasterization.
//!
//! Forward renders produce a [`GBuffer`] (view depth, triangle ids,
//! perspective-correct barycentrics and attributes) for depth tests and
//! textured renders. [`rasterize_uv_space`] rasterizes a mesh in its UV atlas
//! to build the texel geometry used by back-projection.
//!
//! Coverage uses pixel-center sampling with a top-left fill rule evaluated in
//! a canonical edge direction, so two triangles sharing an edge never both
//! claim (or both miss) a pixel center lying on it. Back faces are kept.

mod image;
mod rasterize;
mod uvspace;

pub use self::image::{Image, TextureImage};
pub use rasterize::{rasterize, render_textured, GBuffer, NO_TRIANGLE};
pub use uvspace::{rasterize_uv_space, texel_center_uv, uv_to_texel};

pub(crate) use rasterize::raster_triangle_2d;
