//! Mesh and scalar-field file formats: ASCII OBJ, binary STL, CSV fields.

mod field;
mod obj;
mod stl;

pub use field::{parse_points_csv, read_field, write_field};
pub use obj::{read_obj, write_obj};
pub use stl::{read_stl, write_stl, stl_face_count};

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::mesh::{MeshError, TriMesh};

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("parse error at byte {offset}: {message}")]
    Binary { offset: u64, message: String },
    #[error("cannot infer a mesh format from path {0:?} (expected .obj or .stl)")]
    UnknownFormat(String),
    #[error("mesh has {0} faces, beyond the binary STL limit of 2^32 - 1")]
    StlCapacity(usize),
    #[error(transparent)]
    InvalidMesh(#[from] MeshError),
    #[error("{points} points but {values} values")]
    FieldLengthMismatch { points: usize, values: usize },
}

/// On-disk mesh encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    ObjAscii,
    StlBinary,
}

impl MeshFormat {
    /// Infer the format from a file extension.
    pub fn from_path(path: &Path) -> Result<MeshFormat, MeshIoError> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::ObjAscii),
            Some("stl") => Ok(MeshFormat::StlBinary),
            _ => Err(MeshIoError::UnknownFormat(path.display().to_string())),
        }
    }
}

/// Read a mesh, dispatching on the file extension. STL vertices come back
/// unwelded (three per facet); apply [`TriMesh::weld_exact`] if shared
/// topology is wanted.
pub fn read_mesh(path: &Path) -> Result<TriMesh, MeshIoError> {
    let format = MeshFormat::from_path(path)?;
    let file = BufReader::new(File::open(path)?);
    match format {
        MeshFormat::ObjAscii => read_obj(file),
        MeshFormat::StlBinary => read_stl(file),
    }
}

/// Write a mesh in the given format.
pub fn write_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<(), MeshIoError> {
    let mut file = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::ObjAscii => write_obj(mesh, &mut file),
        MeshFormat::StlBinary => write_stl(mesh, &mut file),
    }
}
