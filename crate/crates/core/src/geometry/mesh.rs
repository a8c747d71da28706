use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2, Vec3};

/// Indexed triangle mesh.
///
/// `normals` is either empty or one unit vector per position. `uvs` is either
/// empty or one entry per triangle corner (`3 * triangles.len()`), and
/// `chart_ids` is either empty or one label per triangle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub uvs: Vec<Vec2>,
    pub chart_ids: Vec<u32>,
}

impl Mesh {
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        Mesh {
            positions,
            triangles,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty() || self.positions.is_empty()
    }

    pub fn has_normals(&self) -> bool {
        !self.normals.is_empty() && self.normals.len() == self.positions.len()
    }

    pub fn has_uvs(&self) -> bool {
        !self.uvs.is_empty() && self.uvs.len() == 3 * self.triangles.len()
    }

    pub fn has_charts(&self) -> bool {
        !self.chart_ids.is_empty() && self.chart_ids.len() == self.triangles.len()
    }

    pub fn corner_uv(&self, tri: usize, corner: usize) -> Vec2 {
        self.uvs[3 * tri + corner]
    }

    pub fn triangle_positions(&self, tri: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[tri];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Unnormalized face normal; its length is twice the triangle area.
    pub fn face_cross(&self, tri: usize) -> Vec3 {
        let [a, b, c] = self.triangle_positions(tri);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, tri: usize) -> f64 {
        0.5 * self.face_cross(tri).norm()
    }

    /// Axis-aligned bounds `(min, max)` of the positions; `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    /// Checks the structural invariants listed on the type.
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len() as u64;
        if let Some(t) = self
            .triangles
            .iter()
            .find(|t| t.iter().any(|&i| u64::from(i) >= n))
        {
            return Err(Error::format("mesh", format!("triangle {t:?} indexes past {n} positions")));
        }
        if self.positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::format("mesh", "non-finite position"));
        }
        if !self.normals.is_empty() {
            if self.normals.len() != self.positions.len() {
                return Err(Error::format("mesh", "normal count differs from position count"));
            }
            if self.normals.iter().any(|v| (v.norm() - 1.0).abs() > 1e-6) {
                return Err(Error::format("mesh", "normal is not unit length"));
            }
        }
        if !self.uvs.is_empty() && self.uvs.len() != 3 * self.triangles.len() {
            return Err(Error::format("mesh", "uv count must be three per triangle"));
        }
        if !self.chart_ids.is_empty() && self.chart_ids.len() != self.triangles.len() {
            return Err(Error::format("mesh", "chart id count differs from triangle count"));
        }
        Ok(())
    }

    /// Applies `f` to every position; normals are left untouched.
    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Mesh {
        Mesh {
            positions: self.positions.iter().map(f).collect(),
            ..self.clone()
        }
    }
}

/// Uniform scale followed by translation: `p' = scale * p + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBoxTransform {
    pub scale: f64,
    pub offset: [f64; 3],
}

impl UnitBoxTransform {
    pub const IDENTITY: UnitBoxTransform = UnitBoxTransform {
        scale: 1.0,
        offset: [0.0; 3],
    };

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        p * self.scale + Vec3::from(self.offset)
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        (p - Vec3::from(self.offset)) / self.scale
    }
}

impl Default for UnitBoxTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Centers the bounding box at the origin and scales the largest extent to 1.
pub fn normalize_to_unit_box(mesh: &Mesh) -> Result<(Mesh, UnitBoxTransform)> {
    let (lo, hi) = mesh.bounds().ok_or(Error::EmptyGeometry)?;
    let extent = (hi - lo).max();
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::DegenerateExtent);
    }
    let center = (lo + hi) * 0.5;
    let scale = 1.0 / extent;
    let transform = UnitBoxTransform {
        scale,
        offset: (-center * scale).into(),
    };
    let out = mesh.map_positions(|p| (p - center) * scale);
    Ok((out, transform))
}

/// Relative area threshold under which a triangle counts as degenerate.
const DEGENERATE_REL: f64 = 1e-14;

fn is_degenerate(cross: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let scale = (b - a).norm_squared().max((c - a).norm_squared()).max((c - b).norm_squared());
    cross.norm() <= DEGENERATE_REL * scale || scale == 0.0
}

/// Area-weighted vertex normals.
///
/// Returns the mesh with `normals` filled and the number of vertices that had
/// no non-degenerate incident triangle; those get `(0, 0, 1)`.
pub fn compute_vertex_normals(mesh: &Mesh) -> (Mesh, usize) {
    let mut acc = vec![Vec3::zeros(); mesh.positions.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.triangle_positions(t);
        let cross = (b - a).cross(&(c - a));
        if is_degenerate(&cross, &a, &b, &c) {
            continue;
        }
        for &i in tri {
            acc[i as usize] += cross;
        }
    }
    let mut orphans = 0;
    let normals = acc
        .into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 && len.is_finite() {
                n / len
            } else {
                orphans += 1;
                Vec3::z()
            }
        })
        .collect();
    (
        Mesh {
            normals,
            ..mesh.clone()
        },
        orphans,
    )
}
