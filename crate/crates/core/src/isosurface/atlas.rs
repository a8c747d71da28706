use std::collections::{HashMap, VecDeque};

use crate::geometry::Mesh;
use crate::{Error, Result, Vec2, Vec3};

/// Empty texels kept between packed charts and around the atlas border.
pub const CHART_SPACING_TEXELS: usize = 4;

/// Minimum normal agreement with the seed triangle for a chart member.
const NORMAL_DOT: f64 = 0.5;

struct Chart {
    triangles: Vec<usize>,
    /// Per member, projected corners in chart-plane units.
    corners: Vec<[Vec2; 3]>,
    lo: Vec2,
    hi: Vec2,
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let a = n.abs();
    let helper = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = helper.cross(n).normalize();
    // (u, v, n) is right-handed, so counter-clockwise stays counter-clockwise.
    (u, n.cross(&u))
}

fn face_normals(mesh: &Mesh) -> Vec<Option<Vec3>> {
    (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle_positions(t);
            let scale = (b - a).norm_squared().max((c - a).norm_squared()).max((c - b).norm_squared());
            let cross = (b - a).cross(&(c - a));
            (cross.norm() > 1e-12 * scale && scale > 0.0).then(|| cross.normalize())
        })
        .collect()
}

fn adjacency(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut by_edge: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut adj = vec![Vec::new(); mesh.triangles.len()];
    for tris in by_edge.values() {
        for &a in tris {
            for &b in tris {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn shrunk(tri: &[Vec2; 3]) -> [Vec2; 3] {
    let c = (tri[0] + tri[1] + tri[2]) / 3.0;
    tri.map(|p| c + (p - c) * (1.0 - 1e-7))
}

/// Separating-axis test on two 2D triangles.
fn triangles_overlap(a: &[Vec2; 3], b: &[Vec2; 3]) -> bool {
    let separated = |p: &[Vec2; 3], q: &[Vec2; 3]| {
        (0..3).any(|e| {
            let d = p[(e + 1) % 3] - p[e];
            let axis = Vec2::new(-d.y, d.x);
            let (plo, phi) = p.iter().map(|v| axis.dot(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            let (qlo, qhi) = q.iter().map(|v| axis.dot(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            phi <= qlo || qhi <= plo
        })
    };
    !separated(a, b) && !separated(b, a)
}

/// Spatial hash of a chart's projected triangles, used to refuse members that
/// would fold over earlier ones.
struct OverlapIndex {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    tris: Vec<[Vec2; 3]>,
}

impl OverlapIndex {
    fn new(cell: f64) -> Self {
        OverlapIndex {
            cell,
            cells: HashMap::new(),
            tris: Vec::new(),
        }
    }

    fn range(&self, tri: &[Vec2; 3]) -> (i64, i64, i64, i64) {
        let f = |v: f64| (v / self.cell).floor() as i64;
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in tri {
            x0 = x0.min(f(p.x));
            y0 = y0.min(f(p.y));
            x1 = x1.max(f(p.x));
            y1 = y1.max(f(p.y));
        }
        (x0, y0, x1, y1)
    }

    fn collides(&self, tri: &[Vec2; 3]) -> bool {
        let s = shrunk(tri);
        let (x0, y0, x1, y1) = self.range(tri);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(list) = self.cells.get(&(cx, cy)) {
                    if list.iter().any(|&k| triangles_overlap(&s, &shrunk(&self.tris[k]))) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, tri: [Vec2; 3]) {
        let k = self.tris.len();
        let (x0, y0, x1, y1) = self.range(&tri);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                self.cells.entry((cx, cy)).or_default().push(k);
            }
        }
        self.tris.push(tri);
    }
}

fn grow_charts(mesh: &Mesh) -> Vec<Chart> {
    let normals = face_normals(mesh);
    let adj = adjacency(mesh);
    let n = mesh.triangles.len();
    let mean_edge = {
        let total: f64 = (0..n)
            .map(|t| {
                let [a, b, c] = mesh.triangle_positions(t);
                (b - a).norm() + (c - b).norm() + (a - c).norm()
            })
            .sum();
        (total / (3 * n.max(1)) as f64).max(1e-9)
    };
    let mut assigned = vec![false; n];
    let seeds = (0..n).filter(|&t| normals[t].is_some()).chain((0..n).filter(|&t| normals[t].is_none()));
    let mut charts = Vec::new();
    for seed in seeds.collect::<Vec<_>>() {
        if assigned[seed] {
            continue;
        }
        let seed_n = normals[seed].unwrap_or_else(Vec3::z);
        let (u, v) = plane_basis(&seed_n);
        let project = |t: usize| mesh.triangle_positions(t).map(|p| Vec2::new(p.dot(&u), p.dot(&v)));
        let mut index = OverlapIndex::new(2.0 * mean_edge);
        let mut chart = Chart {
            triangles: Vec::new(),
            corners: Vec::new(),
            lo: Vec2::repeat(f64::INFINITY),
            hi: Vec2::repeat(f64::NEG_INFINITY),
        };
        let mut queue = VecDeque::from([seed]);
        assigned[seed] = true;
        if normals[seed].is_some() {
            index.insert(project(seed));
        }
        while let Some(t) = queue.pop_front() {
            let proj = project(t);
            for p in &proj {
                chart.lo = chart.lo.inf(p);
                chart.hi = chart.hi.sup(p);
            }
            chart.triangles.push(t);
            chart.corners.push(proj);
            for &nb in &adj[t] {
                if assigned[nb] {
                    continue;
                }
                let accept = match (normals[seed], normals[nb]) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(sn), Some(nn)) => sn.dot(&nn) >= NORMAL_DOT && !index.collides(&project(nb)),
                };
                if accept {
                    assigned[nb] = true;
                    // Reserve the footprint now so queued members cannot collide.
                    if normals[nb].is_some() {
                        index.insert(project(nb));
                    }
                    queue.push_back(nb);
                }
            }
        }
        charts.push(chart);
    }
    charts
}

/// Integer rectangle size in texels of each chart at `scale` texels per unit.
fn rect_sizes(charts: &[Chart], scale: f64) -> Vec<(usize, usize)> {
    charts
        .iter()
        .map(|c| {
            let ext = (c.hi - c.lo) * scale;
            ((ext.x.ceil() as usize).max(1), (ext.y.ceil() as usize).max(1))
        })
        .collect()
}

/// Shelf packing; returns top-left texel corners when everything fits.
fn shelf_pack(sizes: &[(usize, usize)], res: usize) -> Option<Vec<(usize, usize)>> {
    let gap = CHART_SPACING_TEXELS;
    let limit = res.checked_sub(gap)?;
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].1.cmp(&sizes[a].1).then(sizes[b].0.cmp(&sizes[a].0)).then(a.cmp(&b)));
    let mut place = vec![(0, 0); sizes.len()];
    let (mut x, mut y, mut shelf_h) = (gap, gap, 0);
    for i in order {
        let (w, h) = sizes[i];
        if x + w > limit && x > gap {
            y += shelf_h + gap;
            x = gap;
            shelf_h = 0;
        }
        if x + w > limit || y + h > limit {
            return None;
        }
        place[i] = (x, y);
        x += w + gap;
        shelf_h = shelf_h.max(h);
    }
    Some(place)
}

/// Largest scale (texels per unit) at which the charts pack, with placements.
fn fit_scale(charts: &[Chart], res: usize) -> Result<(f64, Vec<(usize, usize)>)> {
    let tiny = vec![(1, 1); charts.len()];
    if shelf_pack(&tiny, res).is_none() {
        return Err(Error::AtlasOverflow);
    }
    let area: f64 = charts.iter().map(|c| (c.hi - c.lo).x * (c.hi - c.lo).y).sum();
    let longest = charts.iter().map(|c| (c.hi - c.lo).max()).fold(0.0, f64::max);
    if !(longest > 0.0) {
        return Ok((1.0, shelf_pack(&tiny, res).unwrap()));
    }
    let usable = (res - 2 * CHART_SPACING_TEXELS) as f64;
    let mut hi = if area > 0.0 { (usable * usable / area).sqrt() } else { usable / longest };
    hi = hi.min(usable / longest);
    let mut lo = hi;
    // Shrink until the packing fits, then bisect back up.
    let mut found = None;
    for _ in 0..400 {
        if let Some(p) = shelf_pack(&rect_sizes(charts, lo), res) {
            found = Some(p);
            break;
        }
        hi = lo;
        lo *= 0.95;
    }
    let mut best = match found {
        Some(p) => (lo, p),
        None => return Err(Error::AtlasOverflow),
    };
    if hi > lo {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..24 {
            let mid = 0.5 * (a + b);
            match shelf_pack(&rect_sizes(charts, mid), res) {
                Some(p) => {
                    best = (mid, p);
                    a = mid;
                }
                None => b = mid,
            }
        }
    }
    Ok(best)
}

/// Builds a UV atlas: charts of triangles whose normals stay within 60 degrees
/// of the chart seed, each projected orthographically onto the seed's plane,
/// shelf-packed into `[0, 1]^2` with [`CHART_SPACING_TEXELS`] of gutter at
/// `atlas_res`.
///
/// A neighbor whose projection would overlap the chart is left for a later
/// chart, so each chart maps injectively into UV space.
pub fn generate_uv_atlas(mesh: &Mesh, atlas_res: usize) -> Result<Mesh> {
    if mesh.is_empty() {
        return Ok(Mesh {
            uvs: Vec::new(),
            chart_ids: Vec::new(),
            ..mesh.clone()
        });
    }
    let charts = grow_charts(mesh);
    let (scale, place) = fit_scale(&charts, atlas_res)?;
    let r = atlas_res as f64;
    let mut uvs = vec![Vec2::zeros(); 3 * mesh.triangles.len()];
    let mut chart_ids = vec![0u32; mesh.triangles.len()];
    for (id, (chart, &(x0, y0))) in charts.iter().zip(&place).enumerate() {
        for (&t, corners) in chart.triangles.iter().zip(&chart.corners) {
            chart_ids[t] = id as u32;
            for (c, p) in corners.iter().enumerate() {
                let x = x0 as f64 + (p.x - chart.lo.x) * scale;
                let y = y0 as f64 + (chart.hi.y - p.y) * scale;
                uvs[3 * t + c] = Vec2::new(x / r, 1.0 - y / r);
            }
        }
    }
    Ok(Mesh {
        uvs,
        chart_ids,
        ..mesh.clone()
    })
}
