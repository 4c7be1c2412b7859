//! Indexed triangle meshes and the structural queries the rest of the crate
//! builds on.
//!
//! A [`TriMesh`] is a plain indexed triangle soup: shared vertices, oriented
//! faces, optional provenance tags. It is immutable after construction; every
//! operation that "modifies" a mesh returns a new one.

use thiserror::Error;

use crate::kahan::CompensatedSum;

/// A position in model space. Coordinates are finite `f64`s for every mesh
/// accepted by [`TriMesh::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A displacement between points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min_components(&self, other: &Point3) -> Point3 {
        Point3::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    pub fn max_components(&self, other: &Point3) -> Point3 {
        Point3::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }
}

impl Vec3 {
    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(&self, other: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(Vec3::new(self.x / n, self.y / n, self.z / n))
        }
    }
}

impl std::ops::Sub for Point3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Point3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Add<Vec3> for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, rhs: Vec3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// An oriented face: three distinct vertex indices whose cyclic order is the
/// orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub v0: u32,
    pub v1: u32,
    pub v2: u32,
}

impl Triangle {
    pub const fn new(v0: u32, v1: u32, v2: u32) -> Self {
        Self { v0, v1, v2 }
    }

    #[inline]
    pub fn indices(&self) -> [u32; 3] {
        [self.v0, self.v1, self.v2]
    }

    /// The same face with reversed orientation.
    #[inline]
    pub fn reversed(&self) -> Triangle {
        Triangle::new(self.v0, self.v2, self.v1)
    }

    /// Directed edges in cyclic order.
    #[inline]
    pub fn edges(&self) -> [(u32, u32); 3] {
        [(self.v0, self.v1), (self.v1, self.v2), (self.v2, self.v0)]
    }
}

/// Which input mesh a face came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshSide {
    A,
    B,
}

/// Origin of a face: the source mesh and the face index it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceProvenance {
    pub source: MeshSide,
    pub original_face: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("vertex {index} has a non-finite coordinate")]
    NonFiniteVertex { index: usize },
    #[error("face {face} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("face {face} repeats vertex index {index}")]
    RepeatedIndex { face: usize, index: u32 },
    #[error("face index {face} out of range ({count} faces)")]
    FaceOutOfRange { face: usize, count: usize },
    #[error("provenance list has {got} entries for {want} faces")]
    ProvenanceMismatch { got: usize, want: usize },
}

/// Indexed triangle soup with oriented faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<Triangle>,
    provenance: Option<Vec<FaceProvenance>>,
}

/// Structural report produced by [`TriMesh::audit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshAudit {
    /// Every undirected edge is used by at most two faces.
    pub is_edge_manifold: bool,
    /// Every undirected edge is traversed equally often in both directions,
    /// i.e. the mesh has no boundary and orientations pair up.
    pub is_closed: bool,
    /// Faces whose three vertices are exactly collinear (zero area).
    pub degenerate_face_count: usize,
    /// Undirected edges whose two directed traversal counts differ.
    pub boundary_edge_count: usize,
}

impl TriMesh {
    /// Build a mesh, validating vertex finiteness and face indexing.
    pub fn new(vertices: Vec<Point3>, faces: Vec<Triangle>) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(MeshError::NonFiniteVertex { index: i });
            }
        }
        let count = vertices.len();
        for (f, tri) in faces.iter().enumerate() {
            for idx in tri.indices() {
                if idx as usize >= count {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: idx,
                        count,
                    });
                }
            }
            let [a, b, c] = tri.indices();
            if a == b || b == c || a == c {
                let dup = if a == b || a == c { a } else { b };
                return Err(MeshError::RepeatedIndex { face: f, index: dup });
            }
        }
        Ok(Self {
            vertices,
            faces,
            provenance: None,
        })
    }

    pub fn with_provenance(
        vertices: Vec<Point3>,
        faces: Vec<Triangle>,
        provenance: Vec<FaceProvenance>,
    ) -> Result<Self, MeshError> {
        if provenance.len() != faces.len() {
            return Err(MeshError::ProvenanceMismatch {
                got: provenance.len(),
                want: faces.len(),
            });
        }
        let mut mesh = Self::new(vertices, faces)?;
        mesh.provenance = Some(provenance);
        Ok(mesh)
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            faces: Vec::new(),
            provenance: None,
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[Triangle] {
        &self.faces
    }

    #[inline]
    pub fn provenance(&self) -> Option<&[FaceProvenance]> {
        self.provenance.as_deref()
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// The three corner positions of a face.
    #[inline]
    pub fn face_points(&self, face: usize) -> [Point3; 3] {
        let t = self.faces[face];
        [
            self.vertices[t.v0 as usize],
            self.vertices[t.v1 as usize],
            self.vertices[t.v2 as usize],
        ]
    }

    fn check_face(&self, face: usize) -> Result<(), MeshError> {
        if face >= self.faces.len() {
            Err(MeshError::FaceOutOfRange {
                face,
                count: self.faces.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Arithmetic mean of a face's corner positions.
    pub fn barycenter(&self, face: usize) -> Result<Point3, MeshError> {
        self.check_face(face)?;
        let [a, b, c] = self.face_points(face);
        Ok(Point3::new(
            (a.x + b.x + c.x) / 3.0,
            (a.y + b.y + c.y) / 3.0,
            (a.z + b.z + c.z) / 3.0,
        ))
    }

    /// A copy of the mesh with one face's orientation reversed.
    pub fn flip_face(&self, face: usize) -> Result<TriMesh, MeshError> {
        self.check_face(face)?;
        let mut out = self.clone();
        out.faces[face] = out.faces[face].reversed();
        Ok(out)
    }

    /// A copy of the mesh with every face's orientation reversed.
    pub fn flip_all(&self) -> TriMesh {
        let mut out = self.clone();
        for f in &mut out.faces {
            *f = f.reversed();
        }
        out
    }

    /// Signed volume: one sixth of the sum of corner-triple determinants.
    /// Equals the enclosed volume for closed, outward-oriented meshes.
    pub fn signed_volume(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for face in 0..self.faces.len() {
            let [a, b, c] = self.face_points(face);
            let det = a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x)
                + a.z * (b.x * c.y - b.y * c.x);
            acc.add(det);
        }
        acc.total() / 6.0
    }

    /// Total surface area.
    pub fn surface_area(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for face in 0..self.faces.len() {
            acc.add(self.face_area(face));
        }
        acc.total()
    }

    /// Area of one face.
    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.face_points(face);
        (b - a).cross(&(c - a)).norm() * 0.5
    }

    /// Axis-aligned bounds, `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices[1..] {
            min = min.min_components(v);
            max = max.max_components(v);
        }
        Some((min, max))
    }

    /// Structural audit: closedness, edge-manifoldness, boundary edges,
    /// degenerate faces. Purely observational.
    pub fn audit(&self) -> MeshAudit {
        use std::collections::BTreeMap;

        // Per undirected edge: traversal counts in (low->high, high->low)
        // direction.
        let mut edges: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
        for tri in &self.faces {
            for (u, v) in tri.edges() {
                let entry = if u < v {
                    &mut edges.entry((u, v)).or_insert((0, 0)).0
                } else {
                    &mut edges.entry((v, u)).or_insert((0, 0)).1
                };
                *entry += 1;
            }
        }

        let mut boundary_edge_count = 0;
        let mut is_edge_manifold = true;
        for &(fwd, rev) in edges.values() {
            if fwd != rev {
                boundary_edge_count += 1;
            }
            if fwd + rev > 2 {
                is_edge_manifold = false;
            }
        }

        let degenerate_face_count = (0..self.faces.len())
            .filter(|&f| {
                let [a, b, c] = self.face_points(f);
                crate::exact::points_collinear(&a, &b, &c)
            })
            .count();

        MeshAudit {
            is_edge_manifold,
            is_closed: boundary_edge_count == 0,
            degenerate_face_count,
            boundary_edge_count,
        }
    }

    /// Concatenate two meshes into one (faces of `other` reindexed).
    pub fn concat(&self, other: &TriMesh) -> TriMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(
            other
                .faces
                .iter()
                .map(|t| Triangle::new(t.v0 + offset, t.v1 + offset, t.v2 + offset)),
        );
        TriMesh {
            vertices,
            faces,
            provenance: None,
        }
    }

    /// Apply a position-wise transform.
    pub fn map_vertices(&self, mut f: impl FnMut(Point3) -> Point3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            faces: self.faces.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn translated(&self, d: Vec3) -> TriMesh {
        self.map_vertices(|p| p + d)
    }

    /// Merge vertices with bit-identical coordinates and drop unused ones.
    /// Faces that collapse onto fewer than three distinct vertices are
    /// removed.
    pub fn weld_exact(&self) -> TriMesh {
        use std::collections::HashMap;

        let mut key_to_new: HashMap<[u64; 3], u32> = HashMap::new();
        let mut new_vertices: Vec<Point3> = Vec::new();
        let mut remap: Vec<u32> = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            let idx = *key_to_new.entry(key).or_insert_with(|| {
                new_vertices.push(*v);
                (new_vertices.len() - 1) as u32
            });
            remap.push(idx);
        }

        let mut faces = Vec::with_capacity(self.faces.len());
        let mut provenance = self.provenance.as_ref().map(|_| Vec::new());
        for (i, tri) in self.faces.iter().enumerate() {
            let t = Triangle::new(
                remap[tri.v0 as usize],
                remap[tri.v1 as usize],
                remap[tri.v2 as usize],
            );
            if t.v0 == t.v1 || t.v1 == t.v2 || t.v0 == t.v2 {
                continue;
            }
            faces.push(t);
            if let (Some(list), Some(orig)) = (provenance.as_mut(), self.provenance.as_ref()) {
                list.push(orig[i]);
            }
        }

        // Drop vertices that no surviving face references.
        let mut used = vec![false; new_vertices.len()];
        for t in &faces {
            for i in t.indices() {
                used[i as usize] = true;
            }
        }
        let mut compact = vec![u32::MAX; new_vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in new_vertices.iter().enumerate() {
            if used[i] {
                compact[i] = vertices.len() as u32;
                vertices.push(*v);
            }
        }
        for t in &mut faces {
            *t = Triangle::new(
                compact[t.v0 as usize],
                compact[t.v1 as usize],
                compact[t.v2 as usize],
            );
        }

        TriMesh {
            vertices,
            faces,
            provenance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn tri_mesh(points: [[f64; 3]; 3]) -> TriMesh {
        TriMesh::new(
            points
                .iter()
                .map(|p| Point3::new(p[0], p[1], p[2]))
                .collect(),
            vec![Triangle::new(0, 1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn barycenter_examples() {
        let m = tri_mesh([[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 3.0, 0.0]]);
        assert_eq!(m.barycenter(0).unwrap(), Point3::new(1.0, 1.0, 0.0));

        let m = tri_mesh([[2.0, 2.0, 2.0], [2.0, 2.0, 2.0], [2.0, 2.0, 2.0]]);
        assert_eq!(m.barycenter(0).unwrap(), Point3::new(2.0, 2.0, 2.0));

        let m = tri_mesh([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let b = m.barycenter(0).unwrap();
        for c in b.coords() {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn barycenter_inside_bounding_box() {
        let m = tri_mesh([[0.25, -3.0, 7.5], [1e-3, 2.0, 7.5], [0.5, 0.0, -1.0]]);
        let b = m.barycenter(0).unwrap();
        let [p0, p1, p2] = m.face_points(0);
        let min = p0.min_components(&p1).min_components(&p2);
        let max = p0.max_components(&p1).max_components(&p2);
        for axis in 0..3 {
            assert!(b.coord(axis) >= min.coord(axis) - f64::EPSILON * max.coord(axis).abs());
            assert!(b.coord(axis) <= max.coord(axis) + f64::EPSILON * max.coord(axis).abs());
        }
    }

    #[test]
    fn barycenter_out_of_range() {
        let m = tri_mesh([[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(
            m.barycenter(1),
            Err(MeshError::FaceOutOfRange { face: 1, count: 1 })
        );
    }

    #[test]
    fn flip_face_reverses_and_is_involution() {
        let m = shapes::unit_cube();
        let flipped = m.flip_face(3).unwrap();
        assert_eq!(flipped.faces()[3], m.faces()[3].reversed());
        assert_eq!(flipped.faces()[2], m.faces()[2]);
        let back = flipped.flip_face(3).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn flip_face_out_of_range() {
        let m = shapes::unit_cube();
        assert!(m.flip_face(12).is_err());
    }

    #[test]
    fn signed_volume_unit_cube() {
        let cube = shapes::unit_cube();
        assert!((cube.signed_volume() - 1.0).abs() < 1e-14);
        assert_eq!(cube.flip_all().signed_volume(), -cube.signed_volume());
    }

    #[test]
    fn signed_volume_additivity() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(5.0, 0.0, 0.0));
        let both = a.concat(&b);
        assert!((both.signed_volume() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn audit_closed_cube() {
        let audit = shapes::unit_cube().audit();
        assert!(audit.is_closed);
        assert!(audit.is_edge_manifold);
        assert_eq!(audit.boundary_edge_count, 0);
        assert_eq!(audit.degenerate_face_count, 0);
    }

    #[test]
    fn audit_cube_with_missing_face() {
        let cube = shapes::unit_cube();
        let faces: Vec<Triangle> = cube.faces()[1..].to_vec();
        let holey = TriMesh::new(cube.vertices().to_vec(), faces).unwrap();
        let audit = holey.audit();
        assert!(!audit.is_closed);
        // The removed face is one triangle of a quad diagonal pair, so the
        // hole boundary is its three edges.
        assert_eq!(audit.boundary_edge_count, 3);
    }

    #[test]
    fn audit_empty_mesh() {
        let audit = TriMesh::empty().audit();
        assert!(audit.is_closed);
        assert!(audit.is_edge_manifold);
        assert_eq!(audit.boundary_edge_count, 0);
        assert_eq!(audit.degenerate_face_count, 0);
    }

    #[test]
    fn audit_flags_degenerate_faces() {
        let m = tri_mesh([[0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, 3.0]]);
        assert_eq!(m.audit().degenerate_face_count, 1);
    }

    #[test]
    fn audit_does_not_mutate() {
        let m = shapes::unit_cube();
        let copy = m.clone();
        let _ = m.audit();
        assert_eq!(m, copy);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(
            TriMesh::new(vec![Point3::new(f64::NAN, 0.0, 0.0)], vec![]),
            Err(MeshError::NonFiniteVertex { index: 0 })
        );
        assert!(matches!(
            TriMesh::new(
                vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)],
                vec![Triangle::new(0, 1, 2)],
            ),
            Err(MeshError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            TriMesh::new(
                vec![
                    Point3::new(0.0, 0.0, 0.0),
                    Point3::new(1.0, 0.0, 0.0),
                    Point3::new(0.0, 1.0, 0.0)
                ],
                vec![Triangle::new(0, 1, 1)],
            ),
            Err(MeshError::RepeatedIndex { .. })
        ));
    }

    #[test]
    fn weld_exact_merges_coincident_vertices() {
        let m = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
            ],
            vec![Triangle::new(0, 1, 2), Triangle::new(3, 5, 4)],
        )
        .unwrap();
        let welded = m.weld_exact();
        assert_eq!(welded.vertex_count(), 4);
        assert_eq!(welded.face_count(), 2);
        assert!(welded.audit().is_edge_manifold);
    }
}
