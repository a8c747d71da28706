use super::Image;
use crate::geometry::{Camera, Mesh};
use crate::{Rgb, Vec2, Vec3};

pub const NO_TRIANGLE: u32 = u32::MAX;

/// Per-pixel geometry of the nearest visible surface.
///
/// `depth` is camera-space distance along the viewing direction (`+inf` where
/// nothing is covered). Attributes of uncovered pixels are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
    pub triangle: Vec<u32>,
    pub barycentric: Vec<[f64; 3]>,
    pub uv: Vec<Vec2>,
    pub normal: Vec<Vec3>,
    pub position: Vec<Vec3>,
}

impl GBuffer {
    pub fn empty(width: usize, height: usize) -> GBuffer {
        let n = width * height;
        GBuffer {
            width,
            height,
            depth: vec![f64::INFINITY; n],
            triangle: vec![NO_TRIANGLE; n],
            barycentric: vec![[0.0; 3]; n],
            uv: vec![Vec2::zeros(); n],
            normal: vec![Vec3::zeros(); n],
            position: vec![Vec3::zeros(); n],
        }
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn covered(&self, i: usize) -> bool {
        self.triangle[i] != NO_TRIANGLE
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.triangle.len()).map(|i| self.covered(i)).collect()
    }

    pub fn coverage_count(&self) -> usize {
        self.triangle.iter().filter(|&&t| t != NO_TRIANGLE).count()
    }
}

#[inline]
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Edge function evaluated from the lexicographically smaller endpoint, so
/// that the two triangles sharing an edge get exactly opposite values.
#[inline]
fn edge(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    if (a.x, a.y) <= (b.x, b.y) {
        orient(a, b, p)
    } else {
        -orient(b, a, p)
    }
}

/// Top-left rule for an edge `a -> b` of a positively oriented triangle in
/// y-down pixel coordinates.
#[inline]
fn owns_edge(a: Vec2, b: Vec2) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Rasterizes a 2D triangle given in continuous pixel coordinates, calling
/// `emit(x, y, barycentrics)` for every covered pixel center in row-major
/// order. Zero-area triangles emit nothing and return `false`.
pub(crate) fn raster_triangle_2d(
    v: [Vec2; 3],
    width: usize,
    height: usize,
    mut emit: impl FnMut(usize, usize, [f64; 3]),
) -> bool {
    let area = orient(v[0], v[1], v[2]);
    if area == 0.0 || !area.is_finite() {
        return false;
    }
    // Positive orientation; `perm` maps local slots back to caller corners.
    let (p, perm) = if area > 0.0 {
        ([v[0], v[1], v[2]], [0, 1, 2])
    } else {
        ([v[0], v[2], v[1]], [0, 2, 1])
    };
    let min_x = p.iter().map(|q| q.x).fold(f64::INFINITY, f64::min);
    let max_x = p.iter().map(|q| q.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = p.iter().map(|q| q.y).fold(f64::INFINITY, f64::min);
    let max_y = p.iter().map(|q| q.y).fold(f64::NEG_INFINITY, f64::max);
    let x0 = (min_x - 0.5).ceil().max(0.0);
    let x1 = (max_x - 0.5).floor().min(width as f64 - 1.0);
    let y0 = (min_y - 0.5).ceil().max(0.0);
    let y1 = (max_y - 0.5).floor().min(height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return true;
    }
    let owned = [owns_edge(p[1], p[2]), owns_edge(p[2], p[0]), owns_edge(p[0], p[1])];
    for y in y0 as usize..=y1 as usize {
        for x in x0 as usize..=x1 as usize {
            let c = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
            let w = [edge(p[1], p[2], c), edge(p[2], p[0], c), edge(p[0], p[1], c)];
            let inside = (0..3).all(|k| w[k] > 0.0 || (w[k] == 0.0 && owned[k]));
            if !inside {
                continue;
            }
            let sum = w[0] + w[1] + w[2];
            let mut bary = [0.0; 3];
            for k in 0..3 {
                bary[perm[k]] = w[k] / sum;
            }
            emit(x, y, bary);
        }
    }
    true
}

#[derive(Clone, Copy)]
struct ClipVertex {
    cam: Vec3,
    bary: [f64; 3],
}

/// Clips a camera-space triangle against `z >= near`. Intersection points are
/// interpolated from the endpoint with the smaller mesh vertex id so shared
/// edges clip identically in both triangles.
fn clip_near(cam: [Vec3; 3], ids: [u32; 3], near: f64) -> Vec<ClipVertex> {
    let corner = |k: usize| ClipVertex {
        cam: cam[k],
        bary: std::array::from_fn(|j| if j == k { 1.0 } else { 0.0 }),
    };
    if cam.iter().all(|c| c.z >= near) {
        return (0..3).map(corner).collect();
    }
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let n = (k + 1) % 3;
        let (a_in, b_in) = (cam[k].z >= near, cam[n].z >= near);
        if a_in {
            out.push(corner(k));
        }
        if a_in != b_in {
            let (lo, hi) = if ids[k] <= ids[n] { (k, n) } else { (n, k) };
            let t = (near - cam[lo].z) / (cam[hi].z - cam[lo].z);
            let mut bary = [0.0; 3];
            bary[lo] = 1.0 - t;
            bary[hi] = t;
            let mut p = cam[lo] + (cam[hi] - cam[lo]) * t;
            p.z = near;
            out.push(ClipVertex { cam: p, bary });
        }
    }
    out
}

/// Rasterizes `mesh` from `camera` into a G-buffer with a nearest-depth test.
///
/// Ties in depth keep the lower triangle index. UVs and normals are
/// interpolated when present; otherwise the UV is zero and the normal is the
/// face normal.
pub fn rasterize(mesh: &Mesh, camera: &Camera) -> GBuffer {
    let (w, h) = camera.resolution();
    let mut gb = GBuffer::empty(w, h);
    let has_uv = mesh.has_uvs();
    let has_n = mesh.has_normals();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let world = mesh.triangle_positions(t);
        let cam = world.map(|p| camera.to_camera(&p));
        if cam.iter().all(|c| c.z < camera.near) || cam.iter().all(|c| c.z > camera.far) {
            continue;
        }
        let poly = clip_near(cam, *tri, camera.near);
        if poly.len() < 3 {
            continue;
        }
        let face_n = (world[1] - world[0]).cross(&(world[2] - world[0]));
        let face_n = face_n.try_normalize(0.0).unwrap_or_else(Vec3::z);
        for k in 1..poly.len() - 1 {
            let sub = [poly[0], poly[k], poly[k + 1]];
            let screen = sub.map(|v| camera.camera_to_pixel(&v.cam));
            let inv_z = sub.map(|v| 1.0 / v.cam.z);
            raster_triangle_2d(screen, w, h, |x, y, l| {
                let pw: [f64; 3] = std::array::from_fn(|j| l[j] * inv_z[j]);
                let sum = pw[0] + pw[1] + pw[2];
                let depth = 1.0 / sum;
                let i = y * w + x;
                if !(depth < gb.depth[i]) || depth > camera.far {
                    return;
                }
                let mut bary = [0.0; 3];
                for j in 0..3 {
                    let wj = pw[j] / sum;
                    for c in 0..3 {
                        bary[c] += wj * sub[j].bary[c];
                    }
                }
                gb.depth[i] = depth;
                gb.triangle[i] = t as u32;
                gb.barycentric[i] = bary;
                gb.position[i] = world[0] * bary[0] + world[1] * bary[1] + world[2] * bary[2];
                if has_uv {
                    gb.uv[i] = (0..3).fold(Vec2::zeros(), |acc, c| acc + mesh.corner_uv(t, c) * bary[c]);
                }
                gb.normal[i] = if has_n {
                    let n = (0..3).fold(Vec3::zeros(), |acc, c| {
                        acc + mesh.normals[tri[c] as usize] * bary[c]
                    });
                    n.try_normalize(0.0).unwrap_or(face_n)
                } else {
                    face_n
                };
            });
        }
    }
    gb
}

/// Textured render: covered pixels sample `texture` bilinearly at their UV,
/// uncovered pixels get `background`. Alpha is the coverage mask.
pub fn render_textured(gbuffer: &GBuffer, texture: &Image, background: Rgb) -> Image {
    let mut out = Image::new(gbuffer.width, gbuffer.height, background, 0.0);
    for i in 0..gbuffer.triangle.len() {
        if gbuffer.covered(i) {
            out.rgb[i] = texture.sample_uv(gbuffer.uv[i]);
            out.alpha[i] = 1.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn front_camera(res: usize) -> Camera {
        Camera::look_at(Vec3::zeros(), -Vec3::z(), Vec3::y(), 40.0, (res, res)).unwrap()
    }

    #[test]
    fn empty_mesh_covers_nothing() {
        let gb = rasterize(&Mesh::default(), &front_camera(16));
        assert_eq!(gb.coverage_count(), 0);
        assert!(gb.depth.iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn nearer_triangle_wins() {
        let big = |z: f64| {
            vec![Vec3::new(-1.0, -1.0, z), Vec3::new(1.0, -1.0, z), Vec3::new(0.0, 1.0, z)]
        };
        let mut positions = big(-0.2);
        positions.extend(big(-0.1));
        let mesh = Mesh::new(positions, vec![[0, 1, 2], [3, 4, 5]]);
        let gb = rasterize(&mesh, &front_camera(32));
        let center = 16 * 32 + 16;
        assert_eq!(gb.triangle[center], 1);
        assert!((gb.depth[center] - 0.1).abs() < 1e-12);
        // reversed submission order gives the same answer
        let swapped = Mesh::new(mesh.positions.clone(), vec![[3, 4, 5], [0, 1, 2]]);
        let gb2 = rasterize(&swapped, &front_camera(32));
        assert_eq!(gb2.triangle[center], 0);
    }

    #[test]
    fn shared_edge_pixels_shaded_once() {
        // Diagonal through exact pixel centers of an 8x8 grid.
        let quad = [Vec2::new(0.5, 0.5), Vec2::new(7.5, 0.5), Vec2::new(7.5, 7.5), Vec2::new(0.5, 7.5)];
        let mut count = vec![0u32; 64];
        for tri in [[quad[0], quad[1], quad[2]], [quad[0], quad[3], quad[2]]] {
            raster_triangle_2d(tri, 8, 8, |x, y, _| count[y * 8 + x] += 1);
        }
        for y in 0..8 {
            for x in 0..8 {
                let c = count[y * 8 + x];
                assert!(c <= 1, "pixel {x},{y} shaded {c} times");
                if (1..7).contains(&x) && (1..7).contains(&y) {
                    assert_eq!(c, 1, "pixel {x},{y} missed");
                }
            }
        }
    }

    #[test]
    fn barycentrics_sum_to_one() {
        let tri = [Vec2::new(0.3, 0.2), Vec2::new(9.1, 2.7), Vec2::new(3.3, 8.8)];
        let mut n = 0;
        raster_triangle_2d(tri, 10, 10, |_, _, b| {
            n += 1;
            assert!(b.iter().all(|&x| x >= 0.0));
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        });
        assert!(n > 10);
    }

    #[test]
    fn near_plane_clipping_keeps_visible_part() {
        let cam = front_camera(32);
        // Triangle crossing the eye plane.
        let mesh = Mesh::new(
            vec![Vec3::new(-1.0, -0.2, -2.0), Vec3::new(1.0, -0.2, -2.0), Vec3::new(0.0, -0.2, 1.0)],
            vec![[0, 1, 2]],
        );
        let gb = rasterize(&mesh, &cam);
        assert!(gb.coverage_count() > 0);
        for i in 0..gb.depth.len() {
            if gb.covered(i) {
                assert!(gb.depth[i] >= cam.near - 1e-12);
            }
        }
    }
}
