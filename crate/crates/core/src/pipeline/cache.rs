//! Versioned binary sidecar holding the texel maps of an extracted mesh, so
//! `refine` does not need to re-rasterize the atlas.
//!
//! Layout (little-endian): magic `TXMP`, u32 version, u32 resolution, 32-byte
//! SHA-256 of the mesh OBJ text, u32 count of valid texels, then per valid
//! texel: u32 texel index, u32 chart, f32 position[3], f32 normal[3].

use std::path::Path;

use crate::texproject::TexelMaps;
use crate::{Error, Result, Vec3};

const MAGIC: &[u8; 4] = b"TXMP";
const VERSION: u32 = 1;

/// Rounds positions and normals to `f32`, the precision the sidecar stores,
/// so maps used before and after a write/read cycle agree exactly.
pub fn quantize(texels: &mut TexelMaps) {
    let q = |v: &Vec3| v.map(|c| f64::from(c as f32));
    for i in 0..texels.len() {
        texels.position[i] = q(&texels.position[i]);
        texels.normal[i] = q(&texels.normal[i]);
    }
}

pub fn encode(texels: &TexelMaps, mesh_sha256: &[u8; 32]) -> Vec<u8> {
    let valid: Vec<usize> = (0..texels.len()).filter(|&i| texels.valid[i]).collect();
    let mut out = Vec::with_capacity(48 + 32 * valid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(texels.res as u32).to_le_bytes());
    out.extend_from_slice(mesh_sha256);
    out.extend_from_slice(&(valid.len() as u32).to_le_bytes());
    for i in valid {
        out.extend_from_slice(&(i as u32).to_le_bytes());
        out.extend_from_slice(&texels.chart[i].to_le_bytes());
        for v in [&texels.position[i], &texels.normal[i]] {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.at + N;
        let slice = self.bytes.get(self.at..end).ok_or_else(|| Error::format("texel cache", "truncated"))?;
        self.at = end;
        Ok(slice.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f32(&mut self) -> Result<f64> {
        Ok(f64::from(f32::from_le_bytes(self.take()?)))
    }
}

/// Decodes a sidecar, returning the maps and the mesh hash it was made for.
pub fn decode(bytes: &[u8]) -> Result<(TexelMaps, [u8; 32])> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::format("texel cache", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format("texel cache", format!("unsupported version {version}")));
    }
    let res = r.u32()? as usize;
    let hash: [u8; 32] = r.take()?;
    let count = r.u32()? as usize;
    if bytes.len() != r.at + count * 32 {
        return Err(Error::format("texel cache", "payload length does not match texel count"));
    }
    let mut maps = TexelMaps::empty(res);
    for _ in 0..count {
        let i = r.u32()? as usize;
        if i >= maps.len() {
            return Err(Error::format("texel cache", "texel index out of range"));
        }
        maps.valid[i] = true;
        maps.chart[i] = r.u32()?;
        maps.position[i] = Vec3::new(r.f32()?, r.f32()?, r.f32()?);
        maps.normal[i] = Vec3::new(r.f32()?, r.f32()?, r.f32()?);
    }
    Ok((maps, hash))
}

pub fn save(path: &Path, texels: &TexelMaps, mesh_sha256: &[u8; 32]) -> Result<()> {
    std::fs::write(path, encode(texels, mesh_sha256)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(TexelMaps, [u8; 32])> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_maps() -> TexelMaps {
        let mut m = TexelMaps::empty(8);
        for i in [3usize, 9, 40, 63] {
            m.valid[i] = true;
            m.chart[i] = (i % 3) as u32;
            m.position[i] = Vec3::new(0.1 * i as f64, -0.3, 1.0 / 3.0);
            m.normal[i] = Vec3::new(0.0, 0.6, 0.8);
        }
        quantize(&mut m);
        m
    }

    #[test]
    fn round_trip_is_exact_after_quantize() {
        let m = sample_maps();
        let (back, hash) = decode(&encode(&m, &[7; 32])).unwrap();
        assert_eq!(back, m);
        assert_eq!(hash, [7; 32]);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample_maps(), &[0; 32]);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut newer = bytes;
        newer[4] = 2;
        assert!(decode(&newer).is_err());
    }
}
