use rayon::prelude::*;

use super::SdfGrid;
use crate::geometry::Mesh;
use crate::Vec3;

/// Kuhn split of the unit cube into six tetrahedra sharing the 0-7 diagonal.
/// Corner bit 0 is +x, bit 1 is +y, bit 2 is +z.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

fn edge_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (u64::from(lo) << 32) | u64::from(hi)
}

type Tri = [u64; 3];

struct TetCorner {
    id: u32,
    pos: Vec3,
    inside: bool,
}

fn emit_tet(c: &[TetCorner; 4], out: &mut Vec<Tri>) {
    let n_in = c.iter().filter(|v| v.inside).count();
    match n_in {
        0 | 4 => {}
        1 | 3 => {
            let lone_inside = n_in == 1;
            let l = c.iter().position(|v| v.inside == lone_inside).unwrap();
            let others: Vec<usize> = (0..4).filter(|&i| i != l).collect();
            let (a, b, d) = (&c[others[0]], &c[others[1]], &c[others[2]]);
            let lp = c[l].pos;
            // Positive when (a, b, d) faces away from the lone corner.
            let det = (a.pos - lp).dot(&(b.pos - lp).cross(&(d.pos - lp)));
            let mut tri = [edge_key(c[l].id, a.id), edge_key(c[l].id, b.id), edge_key(c[l].id, d.id)];
            // Normals must point from inside to outside.
            if (det > 0.0) != lone_inside {
                tri.swap(1, 2);
            }
            out.push(tri);
        }
        _ => {
            let ins: Vec<&TetCorner> = c.iter().filter(|v| v.inside).collect();
            let outs: Vec<&TetCorner> = c.iter().filter(|v| !v.inside).collect();
            let (i0, i1, o0, o1) = (ins[0], ins[1], outs[0], outs[1]);
            let mid = |a: &TetCorner, b: &TetCorner| (a.pos + b.pos) * 0.5;
            let m = [mid(i0, o0), mid(i0, o1), mid(i1, o1), mid(i1, o0)];
            let mut quad = [
                edge_key(i0.id, o0.id),
                edge_key(i0.id, o1.id),
                edge_key(i1.id, o1.id),
                edge_key(i1.id, o0.id),
            ];
            let normal = (m[2] - m[0]).cross(&(m[3] - m[1]));
            let outward = o0.pos + o1.pos - i0.pos - i1.pos;
            if normal.dot(&outward) < 0.0 {
                quad.reverse();
            }
            let start = (0..4).min_by_key(|&i| quad[i]).unwrap();
            quad.rotate_left(start);
            // Emit the half holding the smaller of q1, q3 first, so flipping
            // every sign yields the same triangles reversed, in the same order.
            let a = [quad[0], quad[1], quad[2]];
            let b = [quad[0], quad[2], quad[3]];
            if quad[1] < quad[3] {
                out.extend([a, b]);
            } else {
                out.extend([b, a]);
            }
        }
    }
}

/// Extracts the zero level set of the grid with marching tetrahedra.
///
/// Each edge vertex sits at `t = s_lo / (s_lo - s_hi)` along its lattice edge,
/// measured from the endpoint with the lower lattice index, so the vertex is
/// the same whichever cube produced it. A lattice point is inside when its value
/// is negative. Vertices are numbered in edge-key order and triangles follow
/// lattice order, so the output is identical for any thread count.
pub fn marching_tetrahedra(grid: &SdfGrid) -> Mesh {
    let [nx, ny, nz] = grid.dims;
    let slabs: Vec<Vec<Tri>> = (0..nz - 1)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let corners: [TetCorner; 8] = std::array::from_fn(|c| {
                        let [di, dj, dk] = corner_offset(c);
                        let (ci, cj, ck) = (i + di, j + dj, k + dk);
                        TetCorner {
                            id: grid.index(ci, cj, ck) as u32,
                            pos: Vec3::new(ci as f64, cj as f64, ck as f64),
                            inside: grid.value(ci, cj, ck) < 0.0,
                        }
                    });
                    let n_in = corners.iter().filter(|c| c.inside).count();
                    if n_in == 0 || n_in == 8 {
                        continue;
                    }
                    for tet in &TETS {
                        let tc = tet.map(|c| TetCorner {
                            id: corners[c].id,
                            pos: corners[c].pos,
                            inside: corners[c].inside,
                        });
                        emit_tet(&tc, &mut out);
                    }
                }
            }
            out
        })
        .collect();

    let mut keys: Vec<u64> = slabs.iter().flatten().flatten().copied().collect();
    keys.par_sort_unstable();
    keys.dedup();
    let triangles = slabs
        .iter()
        .flatten()
        .map(|tri| tri.map(|key| keys.binary_search(&key).unwrap() as u32))
        .collect();
    let positions = keys.par_iter().map(|&key| edge_point(grid, key)).collect();
    Mesh::new(positions, triangles)
}

fn lattice_coords(grid: &SdfGrid, id: usize) -> (usize, usize, usize) {
    let [nx, ny, _] = grid.dims;
    (id % nx, (id / nx) % ny, id / (nx * ny))
}

fn edge_point(grid: &SdfGrid, key: u64) -> Vec3 {
    let lo = (key >> 32) as usize;
    let hi = (key & 0xffff_ffff) as usize;
    let s_lo = f64::from(grid.values[lo]);
    let s_hi = f64::from(grid.values[hi]);
    let t = s_lo / (s_lo - s_hi);
    let (ai, aj, ak) = lattice_coords(grid, lo);
    let (bi, bj, bk) = lattice_coords(grid, hi);
    let a = grid.point(ai, aj, ak);
    let b = grid.point(bi, bj, bk);
    a + (b - a) * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isosurface::{sample_grid, scene, AnalyticScene};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn grid_of(scene: &AnalyticScene, n: usize, lo: f64, hi: f64) -> SdfGrid {
        let spacing = (hi - lo) / (n - 1) as f64;
        sample_grid(scene, [n; 3], Vec3::repeat(lo), spacing).unwrap()
    }

    /// Directed edge counts: a closed, consistently oriented surface uses every
    /// undirected edge once in each direction.
    fn check_closed_oriented(mesh: &Mesh) {
        let mut directed: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                *directed.entry((t[e], t[(e + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &n) in &directed {
            assert_eq!(n, 1, "edge {a}-{b} used {n} times in one direction");
            assert_eq!(directed.get(&(b, a)), Some(&1), "edge {a}-{b} has no twin");
        }
    }

    fn edge_count(mesh: &Mesh) -> usize {
        let mut edges = std::collections::BTreeSet::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    #[test]
    fn uniform_grids_give_empty_meshes() {
        for v in [1.0f32, -1.0] {
            let g = SdfGrid::new([5; 3], Vec3::zeros(), 0.1, vec![v; 125], None).unwrap();
            let m = marching_tetrahedra(&g);
            assert!(m.positions.is_empty() && m.triangles.is_empty());
        }
    }

    #[test]
    fn plane_is_flat() {
        let s = AnalyticScene::new("plane", |p| p.z, |_| [0.5; 3]);
        let m = marching_tetrahedra(&grid_of(&s, 4, -0.5, 0.5));
        // z = 0 falls between lattice planes -1/6 and 1/6.
        assert!(!m.triangles.is_empty());
        assert!(m.positions.iter().all(|p| p.z.abs() < 1e-6));
    }

    #[test]
    fn single_cube_one_corner() {
        let mut values = vec![1.0f32; 8];
        values[0] = -1.0;
        let g = SdfGrid::new([2; 3], Vec3::zeros(), 1.0, values, None).unwrap();
        let m = marching_tetrahedra(&g);
        assert_eq!(m.positions.len(), 7, "corner 0 touches all 7 edges of its Kuhn star");
        for p in &m.positions {
            let s = p.iter().filter(|c| (**c - 0.5).abs() < 1e-12).count();
            let z = p.iter().filter(|c| c.abs() < 1e-12).count();
            assert!(s >= 1 && s + z == 3, "{p:?}");
        }
        // Normals face away from the inside corner.
        for t in 0..m.triangles.len() {
            let c = m.triangle_positions(t);
            let centroid = (c[0] + c[1] + c[2]) / 3.0;
            assert!(m.face_cross(t).dot(&centroid) > 0.0);
        }
    }

    #[test]
    fn sphere_vertices_near_surface_and_genus_zero() {
        let s = scene::sphere_fixture(0.3);
        let g = grid_of(&s, 64, -0.5, 0.5);
        let m = marching_tetrahedra(&g);
        for p in &m.positions {
            assert!((p.norm() - 0.3).abs() <= g.spacing, "{}", p.norm());
        }
        check_closed_oriented(&m);
        let chi = m.positions.len() as i64 - edge_count(&m) as i64 + m.triangles.len() as i64;
        assert_eq!(chi, 2);
        // Outward orientation: signed volume is positive and near 4/3 pi r^3.
        let vol: f64 = (0..m.triangles.len())
            .map(|t| {
                let [a, b, c] = m.triangle_positions(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.027;
        assert!((vol - exact).abs() / exact < 0.02, "{vol} vs {exact}");
    }

    #[test]
    fn nested_spheres_give_three_components() {
        let m = marching_tetrahedra(&grid_of(&scene::nested_spheres(), 48, -0.5, 0.5));
        check_closed_oriented(&m);
        let chi = m.positions.len() as i64 - edge_count(&m) as i64 + m.triangles.len() as i64;
        assert_eq!(chi, 6);
    }

    #[test]
    fn blob_is_watertight() {
        let m = marching_tetrahedra(&grid_of(&scene::blob_character(), 64, -0.55, 0.55));
        check_closed_oriented(&m);
    }

    #[test]
    fn vertices_lie_on_lattice_edges() {
        let g = grid_of(&scene::blob_character(), 32, -0.55, 0.55);
        let m = marching_tetrahedra(&g);
        for p in &m.positions {
            let q = (p - g.origin) / g.spacing;
            let off = q.iter().filter(|c| (**c - c.round()).abs() > 1e-9).count();
            // Kuhn edges: axis edges vary one coordinate; face and body
            // diagonals vary two or three by the same fraction.
            let fr: Vec<f64> = q.iter().map(|c| c - c.floor()).filter(|f| *f > 1e-9 && *f < 1.0 - 1e-9).collect();
            assert!(off <= 3);
            for w in fr.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-9, "{q:?}");
            }
        }
    }

    #[test]
    fn identical_across_thread_counts() {
        let g = grid_of(&scene::blob_character(), 40, -0.55, 0.55);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| marching_tetrahedra(&g));
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap().install(|| marching_tetrahedra(&g));
        assert_eq!(one, many);
    }

    fn random_grid(seed: u64, n: usize) -> SdfGrid {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * n * n)
            .map(|_| {
                let v: f32 = rng.random_range(-1.0..1.0);
                if v == 0.0 { 0.5 } else { v }
            })
            .collect();
        SdfGrid::new([n; 3], Vec3::zeros(), 0.1, values, None).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sign_flip_reverses_orientation(seed in any::<u64>()) {
            let g = random_grid(seed, 5);
            let mut flipped = g.clone();
            flipped.values.iter_mut().for_each(|v| *v = -*v);
            let a = marching_tetrahedra(&g);
            let b = marching_tetrahedra(&flipped);
            prop_assert_eq!(a.positions.len(), b.positions.len());
            for (p, q) in a.positions.iter().zip(&b.positions) {
                prop_assert!((p - q).norm() < 1e-9);
            }
            let reversed: Vec<[u32; 3]> = a.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect();
            prop_assert_eq!(reversed, b.triangles);
        }

        #[test]
        fn linear_fields_are_exact(
            nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, c in -0.2f64..0.2,
        ) {
            let n = Vec3::new(nx, ny, nz);
            prop_assume!(n.norm() > 0.1);
            let n = n.normalize();
            let s = AnalyticScene::new("plane", move |p| n.dot(p) - c, |_| [0.0; 3]);
            let m = marching_tetrahedra(&grid_of(&s, 6, -0.5, 0.5));
            for p in &m.positions {
                prop_assert!((n.dot(p) - c).abs() < 1e-6);
            }
        }

        #[test]
        fn random_fields_are_consistently_oriented(seed in any::<u64>()) {
            // Closed only when the surface stays off the boundary, so pad with +1.
            let inner = random_grid(seed, 4);
            let n = 6;
            let mut values = vec![1.0f32; n * n * n];
            for k in 0..4 { for j in 0..4 { for i in 0..4 {
                values[(i + 1) + n * ((j + 1) + n * (k + 1))] = inner.values[inner.index(i, j, k)];
            }}}
            let g = SdfGrid::new([n; 3], Vec3::zeros(), 0.1, values, None).unwrap();
            check_closed_oriented(&marching_tetrahedra(&g));
        }
    }
}
