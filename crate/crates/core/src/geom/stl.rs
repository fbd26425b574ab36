//! STL reading and writing (ASCII and binary).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::mesh::{cross, norm, sub, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StlFormat {
    Ascii,
    Binary,
}

impl std::str::FromStr for StlFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(StlFormat::Ascii),
            "binary" => Ok(StlFormat::Binary),
            other => Err(Error::InvalidInput(format!("unknown STL format {other:?}"))),
        }
    }
}

type Facet = [[f32; 3]; 3];

fn facets(mesh: &TriangleMesh) -> Vec<Facet> {
    mesh.triangles
        .iter()
        .map(|t| t.map(|i| mesh.vertices[i as usize].map(|c| c as f32)))
        .collect()
}

fn facet_normal(f: &Facet) -> [f32; 3] {
    let p = f.map(|v| v.map(f64::from));
    let n = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let len = norm(n);
    if len > 0.0 {
        n.map(|c| (c / len) as f32)
    } else {
        [0.0; 3]
    }
}

pub fn stl_bytes(mesh: &TriangleMesh, format: StlFormat) -> Result<Vec<u8>> {
    if mesh.is_empty() {
        return Err(Error::InvalidInput("cannot export an empty mesh".into()));
    }
    let facets = facets(mesh);
    Ok(match format {
        StlFormat::Binary => {
            let mut out = Vec::with_capacity(84 + 50 * facets.len());
            let mut header = [0u8; 80];
            let tag = b"hullkit binary stl";
            header[..tag.len()].copy_from_slice(tag);
            out.extend_from_slice(&header);
            out.extend_from_slice(&(facets.len() as u32).to_le_bytes());
            for f in &facets {
                for c in facet_normal(f) {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                for v in f {
                    for c in v {
                        out.extend_from_slice(&c.to_le_bytes());
                    }
                }
                out.extend_from_slice(&0u16.to_le_bytes());
            }
            out
        }
        StlFormat::Ascii => {
            let mut s = String::from("solid hull\n");
            for f in &facets {
                let n = facet_normal(f);
                let _ = writeln!(s, "  facet normal {:e} {:e} {:e}", n[0], n[1], n[2]);
                s.push_str("    outer loop\n");
                for v in f {
                    let _ = writeln!(s, "      vertex {:e} {:e} {:e}", v[0], v[1], v[2]);
                }
                s.push_str("    endloop\n  endfacet\n");
            }
            s.push_str("endsolid hull\n");
            s.into_bytes()
        }
    })
}

pub fn export_stl(mesh: &TriangleMesh, path: &Path, format: StlFormat) -> Result<()> {
    let bytes = stl_bytes(mesh, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_binary(bytes: &[u8]) -> Option<Vec<Facet>> {
    if bytes.len() < 84 {
        return None;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().ok()?) as usize;
    if bytes.len() != 84 + 50 * n {
        return None;
    }
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let base = 84 + 50 * k + 12;
        let mut f = [[0f32; 3]; 3];
        for (v, vert) in f.iter_mut().enumerate() {
            for (c, slot) in vert.iter_mut().enumerate() {
                *slot = f32_at(base + 12 * v + 4 * c);
            }
        }
        out.push(f);
    }
    Some(out)
}

fn parse_ascii(text: &str) -> Result<Vec<Facet>> {
    let mut out = Vec::new();
    let mut current: Vec<[f32; 3]> = Vec::with_capacity(3);
    for (row, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let mut v = [0f32; 3];
                for (c, slot) in v.iter_mut().enumerate() {
                    let tok = it.next().ok_or_else(|| Error::Parse {
                        row: row + 1,
                        column: c + 2,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse().map_err(|_| Error::Parse {
                        row: row + 1,
                        column: c + 2,
                        message: format!("bad coordinate {tok:?}"),
                    })?;
                }
                current.push(v);
            }
            Some("endloop") => {
                if current.len() != 3 {
                    return Err(Error::Parse {
                        row: row + 1,
                        column: 1,
                        message: format!("facet with {} vertices", current.len()),
                    });
                }
                out.push([current[0], current[1], current[2]]);
                current.clear();
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Parses STL bytes into an indexed mesh. Vertices with identical
/// coordinates are merged.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    let facets = match parse_binary(bytes) {
        Some(f) => f,
        None => {
            let text = std::str::from_utf8(bytes).map_err(|_| Error::Parse {
                row: 0,
                column: 0,
                message: "neither binary nor ASCII STL".into(),
            })?;
            if !text.trim_start().starts_with("solid") {
                return Err(Error::Parse {
                    row: 1,
                    column: 1,
                    message: "ASCII STL must start with 'solid'".into(),
                });
            }
            parse_ascii(text)?
        }
    };
    let mut index: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(facets.len());
    for f in &facets {
        let mut tri = [0u32; 3];
        for (k, v) in f.iter().enumerate() {
            let key = v.map(f32::to_bits);
            tri[k] = *index.entry(key).or_insert_with(|| {
                vertices.push(v.map(f64::from));
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
    }
    Ok(TriangleMesh::new(vertices, triangles))
}

pub fn import_stl(path: &Path) -> Result<TriangleMesh> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_stl(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::tests::tetra;

    #[test]
    fn single_triangle_binary_size() {
        let m = TriangleMesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        );
        assert_eq!(stl_bytes(&m, StlFormat::Binary).unwrap().len(), 134);
    }

    #[test]
    fn empty_mesh_rejected() {
        assert!(stl_bytes(&TriangleMesh::default(), StlFormat::Ascii).is_err());
    }

    #[test]
    fn round_trip_both_formats() {
        let m = tetra([0.1, -2.3, 4.7], 1.3);
        for fmt in [StlFormat::Ascii, StlFormat::Binary] {
            let back = parse_stl(&stl_bytes(&m, fmt).unwrap()).unwrap();
            assert_eq!(back.triangles.len(), 4);
            for t in 0..4 {
                let a = m.triangle(t).map(|v| v.map(|c| c as f32));
                let b = back.triangle(t).map(|v| v.map(|c| c as f32));
                assert_eq!(a, b);
            }
        }
    }
}
