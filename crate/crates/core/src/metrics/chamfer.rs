use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{normalize_to_unit_box, Mesh};
use crate::numeric::pairwise_sum;
use crate::{Error, Result, Vec3};

/// Points drawn uniformly by area from a mesh surface.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudSample {
    pub points: Vec<Vec3>,
    pub seed: u64,
}

/// Area-weighted surface sampling. Triangles are picked by inverting the
/// cumulative area table; inside a triangle `(1 - sqrt(r1), sqrt(r1) (1 - r2),
/// sqrt(r1) r2)` is uniform.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<PointCloudSample> {
    if mesh.is_empty() {
        return Err(Error::EmptyGeometry);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        total += mesh.triangle_area(t);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let pick = rng.random::<f64>() * total;
            let t = cumulative.partition_point(|&c| c <= pick).min(cumulative.len() - 1);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            let [a, b, c] = mesh.triangle_positions(t);
            a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2)
        })
        .collect();
    Ok(PointCloudSample { points, seed })
}

/// Uniform bucket grid for exact nearest-neighbor queries.
pub struct NearestGrid<'a> {
    points: &'a [Vec3],
    lo: Vec3,
    cell: f64,
    dims: [usize; 3],
    /// CSR layout: points of cell `c` are `order[start[c]..start[c + 1]]`.
    start: Vec<usize>,
    order: Vec<u32>,
}

impl<'a> NearestGrid<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        assert!(!points.is_empty(), "nearest-neighbor grid needs points");
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let ext = hi - lo;
        // About two points per cell on a surface-like cloud.
        let target = (points.len() as f64 / 2.0).max(1.0);
        let volume = ext.iter().map(|e| e.max(1e-9)).product::<f64>();
        let mut cell = (volume / target).cbrt();
        let longest = ext.max().max(1e-9);
        cell = cell.max(longest / 512.0);
        let dims = [0, 1, 2].map(|a| (ext[a] / cell).floor() as usize + 1);
        let mut grid = NearestGrid {
            points,
            lo,
            cell,
            dims,
            start: Vec::new(),
            order: Vec::new(),
        };
        let ids: Vec<usize> = points.iter().map(|p| grid.cell_index(grid.cell_of(p))).collect();
        let n_cells = dims[0] * dims[1] * dims[2];
        let mut count = vec![0usize; n_cells + 1];
        for &c in &ids {
            count[c + 1] += 1;
        }
        for c in 0..n_cells {
            count[c + 1] += count[c];
        }
        let mut fill = count.clone();
        let mut order = vec![0u32; points.len()];
        for (i, &c) in ids.iter().enumerate() {
            order[fill[c]] = i as u32;
            fill[c] += 1;
        }
        grid.start = count;
        grid.order = order;
        grid
    }

    fn cell_of(&self, p: &Vec3) -> [usize; 3] {
        [0, 1, 2].map(|a| {
            let g = ((p[a] - self.lo[a]) / self.cell).floor();
            g.clamp(0.0, (self.dims[a] - 1) as f64) as usize
        })
    }

    fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    fn scan_cell(&self, c: [usize; 3], q: &Vec3, best: &mut f64) {
        let idx = self.cell_index(c);
        for &i in &self.order[self.start[idx]..self.start[idx + 1]] {
            let d = (self.points[i as usize] - q).norm_squared();
            if d < *best {
                *best = d;
            }
        }
    }

    /// Squared distance from `q` to its nearest point.
    ///
    /// Cells are visited in shells of growing Chebyshev radius around the cell
    /// of `q` (clamped into the grid). Anything outside shell `r` is at least
    /// `r * cell` away, which bounds the search.
    pub fn nearest_sq(&self, q: &Vec3) -> f64 {
        let c = self.cell_of(q);
        let max_r = *self.dims.iter().max().unwrap();
        let mut best = f64::INFINITY;
        for r in 0..=max_r {
            let lo: [isize; 3] = c.map(|v| v as isize - r as isize);
            let hi: [isize; 3] = c.map(|v| v as isize + r as isize);
            let clamp = |a: usize, v: isize| v.clamp(0, self.dims[a] as isize - 1) as usize;
            for z in clamp(2, lo[2])..=clamp(2, hi[2]) {
                for y in clamp(1, lo[1])..=clamp(1, hi[1]) {
                    let on_shell_yz = z as isize == lo[2] || z as isize == hi[2] || y as isize == lo[1] || y as isize == hi[1];
                    if on_shell_yz {
                        for x in clamp(0, lo[0])..=clamp(0, hi[0]) {
                            self.scan_cell([x, y, z], q, &mut best);
                        }
                    } else {
                        for x in [lo[0], hi[0]] {
                            if x >= 0 && x < self.dims[0] as isize {
                                self.scan_cell([x as usize, y, z], q, &mut best);
                            }
                        }
                    }
                }
            }
            let reach = r as f64 * self.cell;
            if best <= reach * reach {
                break;
            }
        }
        best
    }
}

/// Reference nearest-neighbor search by exhaustive scan.
pub fn brute_force_nearest_sq(points: &[Vec3], q: &Vec3) -> f64 {
    points.iter().map(|p| (p - q).norm_squared()).fold(f64::INFINITY, f64::min)
}

fn mean_nearest_sq(from: &[Vec3], to: &[Vec3]) -> f64 {
    let grid = NearestGrid::new(to);
    let d: Vec<f64> = from.par_iter().map(|q| grid.nearest_sq(q)).collect();
    pairwise_sum(&d) / d.len() as f64
}

/// Symmetric Chamfer distance: the mean of the two directed mean squared
/// nearest-neighbor distances.
pub fn chamfer_between_clouds(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyGeometry);
    }
    Ok(0.5 * (mean_nearest_sq(a, b) + mean_nearest_sq(b, a)))
}

/// Chamfer distance after normalizing each mesh to the unit box, with
/// separate sampling seeds per mesh.
pub fn chamfer_distance_seeded(a: &Mesh, b: &Mesh, n: usize, seed_a: u64, seed_b: u64) -> Result<f64> {
    let (na, _) = normalize_to_unit_box(a)?;
    let (nb, _) = normalize_to_unit_box(b)?;
    let sa = sample_surface(&na, n, seed_a)?;
    let sb = sample_surface(&nb, n, seed_b)?;
    chamfer_between_clouds(&sa.points, &sb.points)
}

/// [`chamfer_distance_seeded`] with one seed for both meshes, so a mesh
/// compared with itself scores exactly 0.
pub fn chamfer_distance(a: &Mesh, b: &Mesh, n: usize, seed: u64) -> Result<f64> {
    chamfer_distance_seeded(a, b, n, seed, seed)
}
