//! Deterministic, network-free 3D stage of a single-image character generator.
//!
//! The crate covers everything between "a signed distance grid came out of a
//! reconstruction model" and "a refined, seam-free texture plus evaluation
//! numbers":
//!
//! - [`geometry`]: meshes, orbit cameras, unit-box normalization, vertex
//!   normals, umbrella Laplacian smoothing, OBJ I/O.
//! - [`isosurface`]: SDF grids (and the `SDFG` binary format), analytic
//!   fixtures, marching tetrahedra, chart-based UV atlases, coarse texture baking.
//! - [`raster`]: a deterministic software rasterizer (G-buffers, textured
//!   renders, UV-space texel rasterization).
//! - [`texproject`]: four-view back-projection with depth test, silhouette
//!   culling and coarse-closest candidate selection.
//! - [`blend`]: Poisson blending of projected texels into the coarse texture
//!   with a matrix-free preconditioned conjugate gradient solver.
//! - [`schedmath`]: scaled-linear beta schedules, zero terminal-SNR rescaling,
//!   v-prediction conversions and the multi-view noise loss.
//! - [`metrics`]: Chamfer distance, SSIM, PSNR/MSE, mask BCE and the
//!   reconstruction loss combination.
//! - [`pipeline`]: configuration, manifests and the `synth`, `extract`,
//!   `refine`, `render`, `eval` and `schedule` commands.

pub mod blend;
pub mod error;
pub mod geometry;
pub mod isosurface;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod schedmath;
pub mod texproject;

mod numeric;

pub use error::{Error, Result};

/// Double precision 3-vector used for all scene-space quantities.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Double precision 2-vector used for UV coordinates and screen positions.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Linear RGB triple, nominally in `[0, 1]`.
pub type Rgb = [f64; 3];
