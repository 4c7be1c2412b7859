//! CSV serialization of sampled scalar fields: header `x,y,z,w`, one row per
//! sample, shortest round-trip float formatting (a parse of the written file
//! reproduces every value bit-exactly).

use std::io::{BufRead, Write};

use super::MeshIoError;
use crate::mesh::Point3;

pub fn write_field<W: Write>(
    points: &[Point3],
    values: &[f64],
    out: &mut W,
) -> Result<(), MeshIoError> {
    if points.len() != values.len() {
        return Err(MeshIoError::FieldLengthMismatch {
            points: points.len(),
            values: values.len(),
        });
    }
    writeln!(out, "x,y,z,w")?;
    for (p, w) in points.iter().zip(values) {
        writeln!(out, "{},{},{},{}", p.x, p.y, p.z, w)?;
    }
    Ok(())
}

/// Read back a field file written by [`write_field`].
pub fn read_field<R: BufRead>(reader: R) -> Result<(Vec<Point3>, Vec<f64>), MeshIoError> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 1 && trimmed == "x,y,z,w") {
            continue;
        }
        let cols = parse_float_row(trimmed, lineno, 4)?;
        points.push(Point3::new(cols[0], cols[1], cols[2]));
        values.push(cols[3]);
    }
    Ok((points, values))
}

/// Parse a CSV of query points: rows of `x,y,z`, optional `x,y,z` header,
/// extra columns ignored.
pub fn parse_points_csv<R: BufRead>(reader: R) -> Result<Vec<Point3>, MeshIoError> {
    let mut points = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if lineno == 1 && trimmed.split(',').next() == Some("x") {
            continue; // header row
        }
        let cols = parse_float_row(trimmed, lineno, 3)?;
        let p = Point3::new(cols[0], cols[1], cols[2]);
        if !p.is_finite() {
            return Err(MeshIoError::Parse {
                line: lineno,
                message: "non-finite query point".into(),
            });
        }
        points.push(p);
    }
    Ok(points)
}

fn parse_float_row(row: &str, lineno: usize, want: usize) -> Result<Vec<f64>, MeshIoError> {
    let cols: Vec<&str> = row.split(',').collect();
    if cols.len() < want {
        return Err(MeshIoError::Parse {
            line: lineno,
            message: format!("expected {want} comma-separated values, got {}", cols.len()),
        });
    }
    cols[..want]
        .iter()
        .map(|c| {
            c.trim().parse::<f64>().map_err(|e| MeshIoError::Parse {
                line: lineno,
                message: format!("bad number {c:?}: {e}"),
            })
        })
        .collect()
}
