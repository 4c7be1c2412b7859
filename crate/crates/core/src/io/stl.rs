//! Binary STL reader and writer (little-endian, 80-byte header, 50-byte
//! facets). Facet normals are ignored on read — orientation comes from the
//! vertex order — and recomputed on write. 32-bit floats make STL lossy
//! relative to the internal doubles.

use std::io::{Read, Write};

use super::MeshIoError;
use crate::mesh::{Point3, TriMesh, Triangle};

fn binary_err(offset: u64, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Binary {
        offset,
        message: message.into(),
    }
}

/// Validate a face count against the format's u32 limit.
pub fn stl_face_count(faces: usize) -> Result<u32, MeshIoError> {
    u32::try_from(faces).map_err(|_| MeshIoError::StlCapacity(faces))
}

pub fn read_stl<R: Read>(mut reader: R) -> Result<TriMesh, MeshIoError> {
    let mut header = [0u8; 80];
    reader
        .read_exact(&mut header)
        .map_err(|_| binary_err(0, "file shorter than the 80-byte STL header"))?;
    let mut count_buf = [0u8; 4];
    reader
        .read_exact(&mut count_buf)
        .map_err(|_| binary_err(80, "missing facet count"))?;
    let count = u32::from_le_bytes(count_buf) as usize;

    let mut vertices = Vec::with_capacity(count * 3);
    let mut faces = Vec::with_capacity(count);
    let mut facet = [0u8; 50];
    for i in 0..count {
        let offset = 84 + (i as u64) * 50;
        reader.read_exact(&mut facet).map_err(|_| {
            binary_err(
                offset,
                format!("file truncated inside facet {i} of {count}"),
            )
        })?;
        // 12 bytes of normal skipped; 3 vertices of 3 f32 follow.
        for k in 0..3 {
            let at = 12 + k * 12;
            let x = f32::from_le_bytes(facet[at..at + 4].try_into().unwrap());
            let y = f32::from_le_bytes(facet[at + 4..at + 8].try_into().unwrap());
            let z = f32::from_le_bytes(facet[at + 8..at + 12].try_into().unwrap());
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(binary_err(offset, format!("non-finite vertex in facet {i}")));
            }
            vertices.push(Point3::new(x as f64, y as f64, z as f64));
        }
        let base = (i * 3) as u32;
        faces.push(Triangle::new(base, base + 1, base + 2));
    }
    Ok(TriMesh::new(vertices, faces)?)
}

pub fn write_stl<W: Write>(mesh: &TriMesh, out: &mut W) -> Result<(), MeshIoError> {
    let count = stl_face_count(mesh.face_count())?;
    let mut header = [0u8; 80];
    let tag = b"windmesh binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.write_all(&header)?;
    out.write_all(&count.to_le_bytes())?;

    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.face_points(f);
        let n = (b - a).cross(&(c - a)).normalized();
        let n = n.unwrap_or(crate::mesh::Vec3::new(0.0, 0.0, 0.0));
        for v in [n.x, n.y, n.z] {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        for p in [a, b, c] {
            for v in [p.x, p.y, p.z] {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        out.write_all(&0u16.to_le_bytes())?;
    }
    Ok(())
}
