//! Closed primitive meshes: axis-aligned boxes, octahedra, icospheres.
//! All primitives are outward-oriented (positive signed volume).

use crate::mesh::{Point3, Triangle, TriMesh, Vec3};

/// Axis-aligned box between two corners, 12 outward-oriented triangles.
pub fn box_mesh(min: Point3, max: Point3) -> TriMesh {
    let v = [
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(max.x, max.y, max.z),
        Point3::new(min.x, max.y, max.z),
    ];
    // One quad per side, each split along a diagonal.
    let quads: [[u32; 4]; 6] = [
        [0, 3, 2, 1], // -z
        [4, 5, 6, 7], // +z
        [0, 1, 5, 4], // -y
        [2, 3, 7, 6], // +y
        [0, 4, 7, 3], // -x
        [1, 2, 6, 5], // +x
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push(Triangle::new(q[0], q[1], q[2]));
        faces.push(Triangle::new(q[0], q[2], q[3]));
    }
    TriMesh::new(v.to_vec(), faces).expect("box is well-formed")
}

/// The unit cube [0, 1]^3.
pub fn unit_cube() -> TriMesh {
    box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0))
}

/// Axis-aligned cube centered at `center` with the given half-extent.
pub fn cube_centered(center: Point3, half: f64) -> TriMesh {
    let h = Vec3::new(half, half, half);
    box_mesh(center + -h, center + h)
}

/// Regular octahedron with vertices on the coordinate axes at `radius`.
pub fn octahedron(radius: f64) -> TriMesh {
    let r = radius;
    let v = vec![
        Point3::new(r, 0.0, 0.0),
        Point3::new(-r, 0.0, 0.0),
        Point3::new(0.0, r, 0.0),
        Point3::new(0.0, -r, 0.0),
        Point3::new(0.0, 0.0, r),
        Point3::new(0.0, 0.0, -r),
    ];
    let faces = vec![
        Triangle::new(0, 2, 4),
        Triangle::new(2, 1, 4),
        Triangle::new(1, 3, 4),
        Triangle::new(3, 0, 4),
        Triangle::new(2, 0, 5),
        Triangle::new(1, 2, 5),
        Triangle::new(3, 1, 5),
        Triangle::new(0, 3, 5),
    ];
    TriMesh::new(v, faces).expect("octahedron is well-formed")
}

/// Icosphere: subdivided icosahedron with vertices pushed onto the sphere of
/// the given radius, centered at the origin. `subdivisions = s` yields
/// 20 * 4^s faces.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    use std::collections::HashMap;

    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| normalize_to(Point3::new(x, y, z), radius))
    .collect();

    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint_index(&mut vertices, &mut midpoint, a, b, radius);
            let bc = midpoint_index(&mut vertices, &mut midpoint, b, c, radius);
            let ca = midpoint_index(&mut vertices, &mut midpoint, c, a, radius);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    let tris = faces
        .into_iter()
        .map(|[a, b, c]| Triangle::new(a, b, c))
        .collect();
    TriMesh::new(vertices, tris).expect("icosphere is well-formed")
}

fn normalize_to(p: Point3, radius: f64) -> Point3 {
    let n = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
    Point3::new(p.x / n * radius, p.y / n * radius, p.z / n * radius)
}

fn midpoint_index(
    vertices: &mut Vec<Point3>,
    cache: &mut std::collections::HashMap<(u32, u32), u32>,
    a: u32,
    b: u32,
    radius: f64,
) -> u32 {
    let key = (a.min(b), a.max(b));
    if let Some(&idx) = cache.get(&key) {
        return idx;
    }
    let pa = vertices[a as usize];
    let pb = vertices[b as usize];
    let mid = Point3::new(
        0.5 * (pa.x + pb.x),
        0.5 * (pa.y + pb.y),
        0.5 * (pa.z + pb.z),
    );
    vertices.push(normalize_to(mid, radius));
    let idx = (vertices.len() - 1) as u32;
    cache.insert(key, idx);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_are_closed_and_outward() {
        for (mesh, expected_volume) in [
            (unit_cube(), 1.0),
            (box_mesh(Point3::new(-1.0, 0.0, 2.0), Point3::new(3.0, 2.0, 5.0)), 24.0),
            (octahedron(1.0), 4.0 / 3.0),
        ] {
            let audit = mesh.audit();
            assert!(audit.is_closed);
            assert!(audit.is_edge_manifold);
            assert!((mesh.signed_volume() - expected_volume).abs() < 1e-12);
        }
    }

    #[test]
    fn icosphere_face_counts_and_volume() {
        for (s, n) in [(0u32, 20usize), (1, 80), (2, 320), (3, 1280)] {
            let sphere = icosphere(1.0, s);
            assert_eq!(sphere.face_count(), n);
            assert!(sphere.audit().is_closed);
        }
        // Volume converges to 4/3 pi from below.
        let v = icosphere(1.0, 3).signed_volume();
        let exact = 4.0 / 3.0 * std::f64::consts::PI;
        assert!(v > 0.95 * exact && v < exact);
    }
}
