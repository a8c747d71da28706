//! Wavefront OBJ reading and writing.
//!
//! Positions and normals are per vertex (`v`, `vn` share indices). UVs are
//! per corner: the writer emits one `vt` per triangle corner, in triangle
//! order. Chart labels travel as `g chart_<id>` groups. Output is a pure
//! function of the mesh, so identical meshes give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::{Error, Result, Vec2, Vec3};

pub fn to_obj_string(mesh: &Mesh, mtllib: Option<(&str, &str)>) -> String {
    let mut out = String::with_capacity(64 * (mesh.positions.len() + mesh.triangles.len()));
    out.push_str("# toonforge mesh\n");
    if let Some((lib, material)) = mtllib {
        let _ = writeln!(out, "mtllib {lib}");
        let _ = writeln!(out, "usemtl {material}");
    }
    for p in &mesh.positions {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    let has_uv = mesh.has_uvs();
    let has_n = mesh.has_normals();
    if has_uv {
        for uv in &mesh.uvs {
            let _ = writeln!(out, "vt {} {}", uv.x, uv.y);
        }
    }
    if has_n {
        for n in &mesh.normals {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
    }
    let mut group: Option<u32> = None;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.has_charts() && group != Some(mesh.chart_ids[t]) {
            group = Some(mesh.chart_ids[t]);
            let _ = writeln!(out, "g chart_{}", mesh.chart_ids[t]);
        }
        out.push('f');
        for (k, &v) in tri.iter().enumerate() {
            let v = v + 1;
            let vt = 3 * t + k + 1;
            let _ = match (has_uv, has_n) {
                (true, true) => write!(out, " {v}/{vt}/{v}"),
                (true, false) => write!(out, " {v}/{vt}"),
                (false, true) => write!(out, " {v}//{v}"),
                (false, false) => write!(out, " {v}"),
            };
        }
        out.push('\n');
    }
    out
}

pub fn write_obj(path: &Path, mesh: &Mesh, mtllib: Option<(&str, &str)>) -> Result<()> {
    std::fs::write(path, to_obj_string(mesh, mtllib)).map_err(|e| Error::io(path, e))
}

pub fn read_obj(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text)
}

fn resolve(index: &str, count: usize, line: usize) -> Result<usize> {
    let i: i64 = index
        .parse()
        .map_err(|_| Error::format("obj", format!("line {line}: bad index `{index}`")))?;
    let resolved = if i > 0 { i - 1 } else { count as i64 + i };
    if resolved < 0 || resolved as usize >= count {
        return Err(Error::format("obj", format!("line {line}: index {i} out of range")));
    }
    Ok(resolved as usize)
}

fn floats<const N: usize>(parts: &mut std::str::SplitWhitespace, line: usize) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    for slot in &mut out {
        let tok = parts
            .next()
            .ok_or_else(|| Error::format("obj", format!("line {line}: missing coordinate")))?;
        *slot = tok
            .parse()
            .map_err(|_| Error::format("obj", format!("line {line}: bad number `{tok}`")))?;
    }
    Ok(out)
}

pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut positions = Vec::new();
    let mut texcoords = Vec::new();
    let mut file_normals = Vec::new();
    let mut triangles = Vec::new();
    let mut corner_uv: Vec<Option<usize>> = Vec::new();
    let mut corner_n: Vec<Option<usize>> = Vec::new();
    let mut charts: Vec<Option<u32>> = Vec::new();
    let mut chart: Option<u32> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut parts = content.split_whitespace();
        match parts.next() {
            Some("v") => positions.push(Vec3::from(floats::<3>(&mut parts, line)?)),
            Some("vt") => texcoords.push(Vec2::from(floats::<2>(&mut parts, line)?)),
            Some("vn") => file_normals.push(Vec3::from(floats::<3>(&mut parts, line)?)),
            Some("g") | Some("o") => {
                chart = parts
                    .next()
                    .and_then(|name| name.strip_prefix("chart_"))
                    .and_then(|id| id.parse().ok());
            }
            Some("f") => {
                let mut corners = Vec::new();
                for tok in parts {
                    let mut fields = tok.split('/');
                    let v = resolve(fields.next().unwrap_or(""), positions.len(), line)?;
                    let vt = match fields.next() {
                        Some(s) if !s.is_empty() => Some(resolve(s, texcoords.len(), line)?),
                        _ => None,
                    };
                    let vn = match fields.next() {
                        Some(s) if !s.is_empty() => Some(resolve(s, file_normals.len(), line)?),
                        _ => None,
                    };
                    corners.push((v, vt, vn));
                }
                if corners.len() < 3 {
                    return Err(Error::format("obj", format!("line {line}: face needs 3 corners")));
                }
                for k in 1..corners.len() - 1 {
                    let fan = [corners[0], corners[k], corners[k + 1]];
                    triangles.push(fan.map(|(v, _, _)| v as u32));
                    for (_, vt, vn) in fan {
                        corner_uv.push(vt);
                        corner_n.push(vn);
                    }
                    charts.push(chart);
                }
            }
            _ => {}
        }
    }

    let uvs = if corner_uv.iter().all(Option::is_some) && !corner_uv.is_empty() {
        corner_uv.iter().map(|i| texcoords[i.unwrap()]).collect()
    } else if corner_uv.iter().any(Option::is_some) {
        return Err(Error::format("obj", "some faces have texture coordinates and some do not"));
    } else {
        Vec::new()
    };

    let mut normals: Vec<Option<Vec3>> = vec![None; positions.len()];
    for (c, vn) in corner_n.iter().enumerate() {
        if let Some(i) = vn {
            let v = triangles[c / 3][c % 3] as usize;
            normals[v].get_or_insert(file_normals[*i]);
        }
    }
    let normals = if !positions.is_empty() && normals.iter().all(Option::is_some) {
        normals
            .into_iter()
            .map(|n| {
                let n = n.unwrap();
                if (n.norm() - 1.0).abs() > 1e-12 {
                    n.try_normalize(0.0).unwrap_or_else(Vec3::z)
                } else {
                    n
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let chart_ids = if charts.iter().all(Option::is_some) && !charts.is_empty() {
        charts.into_iter().map(Option::unwrap).collect()
    } else {
        Vec::new()
    };

    let mesh = Mesh {
        positions,
        normals,
        triangles,
        uvs,
        chart_ids,
    };
    mesh.validate()?;
    Ok(mesh)
}
