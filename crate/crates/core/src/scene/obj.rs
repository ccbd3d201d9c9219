//! Minimal Wavefront OBJ reader and writer: vertices, faces and `usemtl`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<Vec3>,
    /// Triangle vertex indices and the active `usemtl` name.
    pub faces: Vec<([usize; 3], Option<String>)>,
}

/// Parses OBJ text. Polygons are fan-triangulated; texture and normal
/// indices are ignored. `path` is only used in error messages.
pub fn parse_obj(text: &str, path: &str) -> Result<ObjMesh> {
    let err = |line: usize, message: String| Error::Parse { path: path.to_string(), message: format!("line {line}: {message}") };
    let mut mesh = ObjMesh::default();
    let mut material: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(line_no, format!("bad vertex coordinate `{t}`: {e}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(err(line_no, "vertex needs three coordinates".into()));
                }
                mesh.vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tokens {
                    let head = t.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|e| err(line_no, format!("bad face index `{t}`: {e}")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        mesh.vertices.len() as i64 + i
                    } else {
                        return Err(err(line_no, "face index 0 is invalid".into()));
                    };
                    if resolved < 0 || resolved as usize >= mesh.vertices.len() {
                        return Err(err(line_no, format!("face index {i} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(err(line_no, "face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    mesh.faces.push(([idx[0], idx[k], idx[k + 1]], material.clone()));
                }
            }
            Some("usemtl") => material = tokens.next().map(str::to_string),
            _ => {}
        }
    }
    Ok(mesh)
}

/// Writes triangles grouped by material name.
pub fn write_obj(mesh: &ObjMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    let mut current: Option<&str> = None;
    for (f, m) in &mesh.faces {
        if m.as_deref() != current {
            current = m.as_deref();
            if let Some(name) = current {
                let _ = writeln!(out, "usemtl {name}");
            }
        }
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
