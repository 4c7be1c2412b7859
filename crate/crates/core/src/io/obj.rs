//! ASCII OBJ reader and writer.
//!
//! Only `v` and `f` records matter here; normals, texture coordinates and
//! grouping records are skipped. Faces with more than three corners are
//! fan-triangulated, preserving orientation. Writing uses Rust's shortest
//! round-trip float formatting, so an OBJ round trip reproduces coordinates
//! bit-exactly.

use std::io::{BufRead, Write};

use super::MeshIoError;
use crate::mesh::{Point3, TriMesh, Triangle};

fn parse_err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_obj<R: BufRead>(reader: R) -> Result<TriMesh, MeshIoError> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<Triangle> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(record) = tokens.next() else { continue };
        match record {
            "v" => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| parse_err(lineno, "vertex needs three coordinates"))?;
                    *c = tok
                        .parse::<f64>()
                        .map_err(|e| parse_err(lineno, format!("bad coordinate {tok:?}: {e}")))?;
                    if !c.is_finite() {
                        return Err(parse_err(lineno, format!("non-finite coordinate {tok:?}")));
                    }
                }
                // Extra components (w, vertex colors) are ignored.
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let mut corners: Vec<u32> = Vec::with_capacity(4);
                for tok in tokens {
                    let vref = tok.split('/').next().unwrap_or("");
                    let raw: i64 = vref
                        .parse()
                        .map_err(|e| parse_err(lineno, format!("bad face index {tok:?}: {e}")))?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(parse_err(lineno, "face index 0 is invalid"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(
                            lineno,
                            format!("face index {raw} out of range ({} vertices)", vertices.len()),
                        ));
                    }
                    corners.push(resolved as u32);
                }
                if corners.len() < 3 {
                    return Err(parse_err(lineno, "face needs at least three vertices"));
                }
                for i in 2..corners.len() {
                    faces.push(Triangle::new(corners[0], corners[i - 1], corners[i]));
                }
            }
            _ => {} // comments and unsupported records
        }
    }

    // Map the index-validation error (if any) to a parse-level error; the
    // line is unknown at this point, but the condition is already caught
    // above for indices, so only exotic cases (repeated indices) land here.
    TriMesh::new(vertices, faces).map_err(MeshIoError::InvalidMesh)
}

pub fn write_obj<W: Write>(mesh: &TriMesh, out: &mut W) -> Result<(), MeshIoError> {
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f.v0 + 1, f.v1 + 1, f.v2 + 1)?;
    }
    Ok(())
}
