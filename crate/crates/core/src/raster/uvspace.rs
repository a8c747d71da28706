use super::raster_triangle_2d;
use crate::geometry::Mesh;
use crate::texproject::{TexelMaps, NO_CHART};
use crate::{Vec2, Vec3};

/// UV of the center of texel `(col, row)`; row 0 is the top of the image (v = 1).
pub fn texel_center_uv(col: usize, row: usize, res: usize) -> Vec2 {
    let r = res as f64;
    Vec2::new((col as f64 + 0.5) / r, 1.0 - (row as f64 + 0.5) / r)
}

/// Continuous texel coordinates (x right, y down) of a UV.
pub fn uv_to_texel(uv: Vec2, res: usize) -> Vec2 {
    let r = res as f64;
    Vec2::new(uv.x * r, (1.0 - uv.y) * r)
}

/// Half the texel diagonal: a texel whose center is this close to a triangle
/// overlaps (or touches) its footprint.
const CONSERVATIVE_RADIUS: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p - (a + ab * t)).norm(), t)
}

/// Distance from `p` to the triangle and the barycentrics of the closest point.
fn closest_on_triangle(p: Vec2, v: [Vec2; 3]) -> (f64, [f64; 3]) {
    let area = (v[1] - v[0]).perp(&(v[2] - v[0]));
    let l1 = (p - v[0]).perp(&(v[2] - v[0])) / area;
    let l2 = (v[1] - v[0]).perp(&(p - v[0])) / area;
    let l0 = 1.0 - l1 - l2;
    if l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0 {
        return (0.0, [l0, l1, l2]);
    }
    let mut best = (f64::INFINITY, [0.0; 3]);
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let (d, t) = closest_on_segment(p, v[a], v[b]);
        if d < best.0 {
            let mut bary = [0.0; 3];
            bary[a] = 1.0 - t;
            bary[b] = t;
            best = (d, bary);
        }
    }
    best
}

/// Rasterizes the mesh in UV space at `res x res` texels.
///
/// Texels whose center is covered (top-left rule) take the barycentric blend
/// of corner positions and normals. Texels that only overlap a triangle's
/// footprint near a chart border are filled from the closest point of the
/// nearest triangle, so bilinear lookups at chart edges never read gutter
/// texels. Returns the texel maps and the number of triangles skipped for a
/// zero-area UV footprint.
pub fn rasterize_uv_space(mesh: &Mesh, res: usize) -> (TexelMaps, usize) {
    let mut maps = TexelMaps::empty(res);
    if !mesh.has_uvs() {
        return (maps, mesh.triangles.len());
    }
    let has_n = mesh.has_normals();
    let has_charts = mesh.has_charts();
    let corner_normal = |t: usize, face: &Vec3| -> [Vec3; 3] {
        if has_n {
            mesh.triangles[t].map(|v| mesh.normals[v as usize])
        } else {
            [*face; 3]
        }
    };
    let mut skipped = 0;
    let mut uv_tris = Vec::with_capacity(mesh.triangles.len());

    for t in 0..mesh.triangles.len() {
        let tex: [Vec2; 3] = std::array::from_fn(|c| uv_to_texel(mesh.corner_uv(t, c), res));
        let world = mesh.triangle_positions(t);
        let face = (world[1] - world[0])
            .cross(&(world[2] - world[0]))
            .try_normalize(0.0)
            .unwrap_or_else(Vec3::z);
        let normals = corner_normal(t, &face);
        let chart = if has_charts { mesh.chart_ids[t] } else { 0 };
        let ok = raster_triangle_2d(tex, res, res, |x, y, b| {
            let i = y * res + x;
            if maps.valid[i] {
                return;
            }
            maps.valid[i] = true;
            maps.chart[i] = chart;
            maps.position[i] = world[0] * b[0] + world[1] * b[1] + world[2] * b[2];
            let n = normals[0] * b[0] + normals[1] * b[1] + normals[2] * b[2];
            maps.normal[i] = n.try_normalize(0.0).unwrap_or(face);
        });
        if ok {
            uv_tris.push((t, tex, world, normals, face, chart));
        } else {
            skipped += 1;
        }
    }

    // Conservative ring: nearest triangle wins, lower index on ties.
    let mut best = vec![f64::INFINITY; res * res];
    let mut fill: Vec<Option<(usize, [f64; 3])>> = vec![None; res * res];
    for (k, (_, tex, ..)) in uv_tris.iter().enumerate() {
        let lo_x = tex.iter().map(|v| v.x).fold(f64::INFINITY, f64::min) - 1.0;
        let hi_x = tex.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let lo_y = tex.iter().map(|v| v.y).fold(f64::INFINITY, f64::min) - 1.0;
        let hi_y = tex.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let x0 = lo_x.floor().max(0.0) as usize;
        let y0 = lo_y.floor().max(0.0) as usize;
        let x1 = (hi_x.ceil().max(0.0) as usize).min(res);
        let y1 = (hi_y.ceil().max(0.0) as usize).min(res);
        for y in y0..y1 {
            for x in x0..x1 {
                let i = y * res + x;
                if maps.valid[i] {
                    continue;
                }
                let c = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
                let (d, b) = closest_on_triangle(c, *tex);
                if d <= CONSERVATIVE_RADIUS && d < best[i] {
                    best[i] = d;
                    fill[i] = Some((k, b));
                }
            }
        }
    }
    for (i, entry) in fill.into_iter().enumerate() {
        if let Some((k, b)) = entry {
            let (_, _, world, normals, face, chart) = &uv_tris[k];
            maps.valid[i] = true;
            maps.chart[i] = *chart;
            maps.position[i] = world[0] * b[0] + world[1] * b[1] + world[2] * b[2];
            let n = normals[0] * b[0] + normals[1] * b[1] + normals[2] * b[2];
            maps.normal[i] = n.try_normalize(0.0).unwrap_or(*face);
        }
    }
    debug_assert!(maps.chart.iter().zip(&maps.valid).all(|(&c, &v)| v == (c != NO_CHART)));
    (maps, skipped)
}
