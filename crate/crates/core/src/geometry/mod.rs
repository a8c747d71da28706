//! Mesh and camera types plus the mesh-level operations the rest of the
//! pipeline builds on.
//!
//! Conventions: right-handed world, +Y up, the front view looks from +Z
//! toward the origin. UVs are stored per triangle corner so charts can have
//! seams without duplicating positions.

mod camera;
mod mesh;
pub mod obj;
mod smooth;

pub use camera::{camera_from_orbit, Camera, DEFAULT_FAR, DEFAULT_NEAR};
pub use mesh::{compute_vertex_normals, normalize_to_unit_box, Mesh, UnitBoxTransform};
pub use smooth::{laplacian_smooth, SmoothingParams};
