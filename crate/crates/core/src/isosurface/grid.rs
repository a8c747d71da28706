use std::io::{Read, Write};
use std::path::Path;

use super::AnalyticScene;
use crate::{Error, Result, Rgb, Vec3};

/// Regular lattice of signed distances, `x` fastest.
///
/// Values, colors, origin and spacing are held at `f32` precision, matching
/// the `SDFG` file format, so a grid survives a write/read cycle unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub spacing: f64,
    pub values: Vec<f32>,
    pub color: Option<Vec<[f32; 3]>>,
}

fn f32_round(v: f64) -> f64 {
    f64::from(v as f32)
}

impl SdfGrid {
    pub fn new(dims: [usize; 3], origin: Vec3, spacing: f64, values: Vec<f32>, color: Option<Vec<[f32; 3]>>) -> Result<SdfGrid> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidParameter(format!("grid dims {dims:?} must be >= 2")));
        }
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n || color.as_ref().is_some_and(|c| c.len() != n) {
            return Err(Error::format("sdf grid", "value count does not match dims"));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("sdf grid", "non-finite value"));
        }
        Ok(SdfGrid {
            dims,
            origin: origin.map(f32_round),
            spacing: f32_round(spacing),
            values,
            color,
        })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        f64::from(self.values[self.index(i, j, k)])
    }

    pub fn max_corner(&self) -> Vec3 {
        self.point(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    /// Message when the domain leaves the `[-0.6, 0.6]^3` working box.
    pub fn domain_warning(&self) -> Option<String> {
        let lo = self.origin;
        let hi = self.max_corner();
        let inside = lo.iter().chain(hi.iter()).all(|c| c.abs() <= 0.6 + 1e-6);
        (!inside).then(|| format!("grid domain [{lo:?}, {hi:?}] extends past [-0.6, 0.6]^3"))
    }

    /// Trilinear color sample; `p` is clamped to the grid domain.
    pub fn sample_color(&self, p: &Vec3) -> Option<Rgb> {
        let color = self.color.as_ref()?;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let g = ((p[a] - self.origin[a]) / self.spacing).clamp(0.0, (self.dims[a] - 1) as f64);
            let b = (g.floor() as usize).min(self.dims[a] - 2);
            base[a] = b;
            frac[a] = g - b as f64;
        }
        let mut out = [0.0; 3];
        for corner in 0..8 {
            let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let w: f64 = (0..3)
                .map(|a| if off[a] == 1 { frac[a] } else { 1.0 - frac[a] })
                .product();
            if w == 0.0 {
                continue;
            }
            let c = color[self.index(base[0] + off[0], base[1] + off[1], base[2] + off[2])];
            for k in 0..3 {
                out[k] += w * f64::from(c[k]);
            }
        }
        Some(out)
    }
}

/// Evaluates an analytic scene at every lattice point.
pub fn sample_grid(scene: &AnalyticScene, dims: [usize; 3], origin: Vec3, spacing: f64) -> Result<SdfGrid> {
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidParameter(format!("grid dims {dims:?} must be >= 2")));
    }
    let origin = origin.map(f32_round);
    let spacing = f32_round(spacing);
    let n = dims[0] * dims[1] * dims[2];
    let points: Vec<Vec3> = crate::numeric::par_map(n, |idx| {
        let i = idx % dims[0];
        let j = (idx / dims[0]) % dims[1];
        let k = idx / (dims[0] * dims[1]);
        origin + Vec3::new(i as f64, j as f64, k as f64) * spacing
    });
    let values = crate::numeric::par_map(n, |i| scene.sdf(&points[i]) as f32);
    let color = crate::numeric::par_map(n, |i| scene.color(&points[i]).map(|c| c as f32));
    SdfGrid::new(dims, origin, spacing, values, Some(color))
}

const MAGIC: &[u8; 4] = b"SDFG";
const VERSION: u32 = 1;

/// Writes the little-endian `SDFG` v1 layout.
pub fn write_sdfg(grid: &SdfGrid, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for d in grid.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for c in grid.origin.iter() {
        w.write_all(&(*c as f32).to_le_bytes())?;
    }
    w.write_all(&(grid.spacing as f32).to_le_bytes())?;
    w.write_all(&[u8::from(grid.color.is_some())])?;
    let mut buf = Vec::with_capacity(4 * grid.values.len());
    for v in &grid.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    if let Some(color) = &grid.color {
        buf.clear();
        for c in color {
            for ch in c {
                buf.extend_from_slice(&ch.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let slice = bytes
        .get(*at..*at + N)
        .ok_or_else(|| Error::format("SDFG", "truncated file"))?;
    *at += N;
    Ok(slice.try_into().unwrap())
}

pub fn read_sdfg(mut r: impl Read) -> Result<SdfGrid> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::format("SDFG", e.to_string()))?;
    let mut at = 0;
    if &take::<4>(&bytes, &mut at)? != MAGIC {
        return Err(Error::format("SDFG", "bad magic"));
    }
    let version = u32::from_le_bytes(take(&bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::format("SDFG", format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = u32::from_le_bytes(take(&bytes, &mut at)?) as usize;
    }
    let mut origin = Vec3::zeros();
    for a in 0..3 {
        origin[a] = f64::from(f32::from_le_bytes(take(&bytes, &mut at)?));
    }
    let spacing = f64::from(f32::from_le_bytes(take(&bytes, &mut at)?));
    let has_color = take::<1>(&bytes, &mut at)?[0];
    if has_color > 1 {
        return Err(Error::format("SDFG", "has_color flag must be 0 or 1"));
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::format("SDFG", "dims overflow"))?;
    let expected = n * 4 * (1 + 3 * usize::from(has_color));
    if bytes.len() - at != expected {
        return Err(Error::format(
            "SDFG",
            format!("payload is {} bytes, expected {expected}", bytes.len() - at),
        ));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f32::from_le_bytes(take(&bytes, &mut at)?));
    }
    let color = if has_color == 1 {
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            c.push([
                f32::from_le_bytes(take(&bytes, &mut at)?),
                f32::from_le_bytes(take(&bytes, &mut at)?),
                f32::from_le_bytes(take(&bytes, &mut at)?),
            ]);
        }
        Some(c)
    } else {
        None
    };
    SdfGrid::new(dims, origin, spacing, values, color)
}

impl SdfGrid {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_sdfg(self, &mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SdfGrid> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_sdfg(std::io::BufReader::new(file))
    }
}
