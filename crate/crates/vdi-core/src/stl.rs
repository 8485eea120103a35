//! STL mesh loading, binary and ASCII.
//!
//! The format is sniffed from the payload, never the file extension: a body
//! that starts with `solid` *and* parses as ASCII is ASCII, anything else is
//! treated as binary (plenty of binary exporters write `solid` into the
//! 80-byte header). Facet normals are discarded; the renderer does not use
//! them.

use nalgebra::Point3;
use thiserror::Error;

use crate::mesh::TriangleMesh;

/// Binary layout: 80-byte header, little-endian u32 facet count, then per
/// facet 12 f32 (normal + 3 vertices) and a u16 attribute count.
const BINARY_HEADER_LEN: usize = 80;
const BINARY_FACET_LEN: usize = 50;

#[derive(Debug, Error)]
pub enum StlError {
    #[error("binary STL truncated: header declares {declared} facets but payload holds {available}")]
    Truncated { declared: u32, available: usize },
    #[error("binary STL shorter than its 84-byte preamble ({len} bytes)")]
    TooShort { len: usize },
    #[error("ASCII STL syntax error at line {line}: {message}")]
    AsciiSyntax { line: usize, message: String },
    #[error("STL facet holds a non-finite vertex coordinate")]
    NonFinite,
}

/// Parses a complete STL payload, auto-detecting binary vs. ASCII.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh, StlError> {
    if looks_ascii(bytes) {
        match parse_ascii(bytes) {
            Ok(mesh) => return Ok(mesh),
            // A payload that is pure text but malformed is reported as the
            // ASCII error it is; only binary-looking data falls through.
            Err(err) if is_entirely_text(bytes) => return Err(err),
            Err(_) => {}
        }
    }
    parse_binary(bytes)
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let head: Vec<u8> = bytes
        .iter()
        .copied()
        .skip_while(|b| b.is_ascii_whitespace())
        .take(5)
        .collect();
    head.eq_ignore_ascii_case(b"solid")
}

fn is_entirely_text(bytes: &[u8]) -> bool {
    std::str::from_utf8(bytes)
        .map(|s| !s.contains('\0'))
        .unwrap_or(false)
}

fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh, StlError> {
    if bytes.len() < BINARY_HEADER_LEN + 4 {
        return Err(StlError::TooShort { len: bytes.len() });
    }
    let declared = u32::from_le_bytes(
        bytes[BINARY_HEADER_LEN..BINARY_HEADER_LEN + 4]
            .try_into()
            .unwrap(),
    );
    let body = &bytes[BINARY_HEADER_LEN + 4..];
    let available = body.len() / BINARY_FACET_LEN;
    if (declared as usize) > available {
        return Err(StlError::Truncated {
            declared,
            available,
        });
    }

    let n = declared as usize;
    let mut vertices = Vec::with_capacity(3 * n);
    let mut triangles = Vec::with_capacity(n);
    for f in 0..n {
        let facet = &body[f * BINARY_FACET_LEN..(f + 1) * BINARY_FACET_LEN];
        // 12 bytes of normal skipped
        for v in 0..3 {
            let off = 12 + v * 12;
            let x = f32::from_le_bytes(facet[off..off + 4].try_into().unwrap());
            let y = f32::from_le_bytes(facet[off + 4..off + 8].try_into().unwrap());
            let z = f32::from_le_bytes(facet[off + 8..off + 12].try_into().unwrap());
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(StlError::NonFinite);
            }
            vertices.push(Point3::new(x as f64, y as f64, z as f64));
        }
        let base = (3 * f) as u32;
        triangles.push([base, base + 1, base + 2]);
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh, StlError> {
    let text = std::str::from_utf8(bytes).map_err(|e| StlError::AsciiSyntax {
        line: 1,
        message: format!("not valid UTF-8: {e}"),
    })?;

    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut facet_vertices: Vec<Point3<f64>> = Vec::new();
    let mut in_solid = false;
    let mut in_facet = false;
    let mut in_loop = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let err = |message: String| StlError::AsciiSyntax { line, message };
        match keyword {
            "solid" => {
                if in_solid {
                    return Err(err("nested 'solid'".into()));
                }
                in_solid = true;
            }
            "endsolid" => {
                if !in_solid || in_facet {
                    return Err(err("'endsolid' outside a solid".into()));
                }
                in_solid = false;
            }
            "facet" => {
                if !in_solid || in_facet {
                    return Err(err("'facet' outside a solid or nested".into()));
                }
                // "facet normal nx ny nz" — normal values ignored
                if tokens.next() != Some("normal") {
                    return Err(err("expected 'facet normal'".into()));
                }
                in_facet = true;
                facet_vertices.clear();
            }
            "endfacet" => {
                if !in_facet || in_loop {
                    return Err(err("'endfacet' without matching 'facet'".into()));
                }
                if facet_vertices.len() != 3 {
                    return Err(err(format!(
                        "facet has {} vertices, expected 3",
                        facet_vertices.len()
                    )));
                }
                let base = vertices.len() as u32;
                vertices.extend_from_slice(&facet_vertices);
                triangles.push([base, base + 1, base + 2]);
                in_facet = false;
            }
            "outer" => {
                if !in_facet || in_loop || tokens.next() != Some("loop") {
                    return Err(err("expected 'outer loop' inside a facet".into()));
                }
                in_loop = true;
            }
            "endloop" => {
                if !in_loop {
                    return Err(err("'endloop' without matching 'outer loop'".into()));
                }
                in_loop = false;
            }
            "vertex" => {
                if !in_loop {
                    return Err(err("'vertex' outside 'outer loop'".into()));
                }
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| err("vertex needs 3 coordinates".into()))?;
                    *c = tok
                        .parse::<f64>()
                        .map_err(|_| err(format!("bad number '{tok}'")))?;
                    if !c.is_finite() {
                        return Err(StlError::NonFinite);
                    }
                }
                if facet_vertices.len() == 3 {
                    return Err(err("more than 3 vertices in a facet".into()));
                }
                facet_vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            other => {
                return Err(err(format!("unexpected token '{other}'")));
            }
        }
    }
    if in_solid || in_facet || in_loop {
        return Err(StlError::AsciiSyntax {
            line: text.lines().count(),
            message: "unexpected end of file".into(),
        });
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

/// Serializes a mesh to binary STL. Coordinates are narrowed to f32 per the
/// format; facet normals are written as zeros.
pub fn write_binary_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let n = mesh.triangle_count();
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 4 + n * BINARY_FACET_LEN);
    out.extend_from_slice(&[0u8; BINARY_HEADER_LEN]);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for t in 0..n {
        out.extend_from_slice(&[0u8; 12]); // normal
        for v in mesh.triangle_vertices(t) {
            for c in [v.x, v.y, v.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}
