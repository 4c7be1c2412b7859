//! Axis-aligned bounding box tree over mesh faces.
//!
//! The tree serves two purposes: it fixes a cache-friendly face order for
//! batch winding evaluation, and it drives the broad phase of co-refinement
//! (box-overlap candidate pairs). It never changes any computed value.

use thiserror::Error;

use crate::mesh::{Point3, TriMesh};

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn of_points(points: &[Point3]) -> Aabb {
        let mut min = points[0];
        let mut max = points[0];
        for p in &points[1..] {
            min = min.min_components(p);
            max = max.max_components(p);
        }
        Aabb { min, max }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min_components(&other.min),
            max: self.max.max_components(&other.max),
        }
    }

    #[inline]
    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
            && self.min.z <= other.max.z
            && other.min.z <= self.max.z
    }

    #[inline]
    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.min.x <= other.min.x
            && self.min.y <= other.min.y
            && self.min.z <= other.min.z
            && self.max.x >= other.max.x
            && self.max.y >= other.max.y
            && self.max.z >= other.max.z
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub enum BvhNodeKind {
    Leaf { start: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
pub struct BvhNode {
    pub aabb: Aabb,
    /// Number of faces below this node.
    pub count: u32,
    pub kind: BvhNodeKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot build a BVH over a mesh with no faces")]
pub struct EmptyMesh;

const LEAF_SIZE: usize = 8;

/// Static face BVH built by median split on the longest centroid axis.
/// Construction is deterministic for a given mesh.
///
/// Besides the node tree, the structure keeps an evaluation-friendly copy of
/// the mesh: vertex positions plus face index triples reordered so each leaf
/// is contiguous. The shared-vertex layout keeps the per-query working set
/// small.
#[derive(Debug, Clone)]
pub struct WindingBvh {
    nodes: Vec<BvhNode>,
    /// Face indices, partitioned so each leaf owns a contiguous range.
    order: Vec<u32>,
    /// Face corner indices in `order`, into `verts`.
    tri_indices: Vec<[u32; 3]>,
    /// Vertex positions.
    verts: Vec<[f64; 3]>,
    face_count: usize,
}

impl WindingBvh {
    pub fn build(mesh: &TriMesh) -> Result<WindingBvh, EmptyMesh> {
        if mesh.is_empty() {
            return Err(EmptyMesh);
        }
        let n = mesh.face_count();
        let boxes: Vec<Aabb> = (0..n).map(|f| Aabb::of_points(&mesh.face_points(f))).collect();
        let centers: Vec<Point3> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        build_node(&boxes, &centers, &mut order, 0, n, &mut nodes);

        let tri_indices = order
            .iter()
            .map(|&f| mesh.faces()[f as usize].indices())
            .collect();
        let verts = mesh.vertices().iter().map(|v| v.coords()).collect();

        Ok(WindingBvh {
            nodes,
            order,
            tri_indices,
            verts,
            face_count: n,
        })
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.face_count
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    /// Face indices in leaf-partitioned traversal order.
    pub fn face_order(&self) -> &[u32] {
        &self.order
    }

    pub(crate) fn tri_indices(&self) -> &[[u32; 3]] {
        &self.tri_indices
    }

    pub(crate) fn verts(&self) -> &[[f64; 3]] {
        &self.verts
    }

    fn face_box(&self, slot: usize) -> Aabb {
        let [i, j, k] = self.tri_indices[slot];
        let pt = |i: u32| {
            let v = self.verts[i as usize];
            Point3::new(v[0], v[1], v[2])
        };
        Aabb::of_points(&[pt(i), pt(j), pt(k)])
    }

    /// All face-index pairs (self, other) whose bounding boxes overlap.
    /// A superset of the actually intersecting pairs; deterministic order.
    pub fn overlap_pairs(&self, other: &WindingBvh) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut stack = vec![(0u32, 0u32)];
        while let Some((i, j)) = stack.pop() {
            let a = &self.nodes[i as usize];
            let b = &other.nodes[j as usize];
            if !a.aabb.overlaps(&b.aabb) {
                continue;
            }
            match (a.kind, b.kind) {
                (BvhNodeKind::Leaf { start: sa }, BvhNodeKind::Leaf { start: sb }) => {
                    for da in 0..a.count {
                        let slot_a = (sa + da) as usize;
                        let box_a = self.face_box(slot_a);
                        for db in 0..b.count {
                            let slot_b = (sb + db) as usize;
                            if box_a.overlaps(&other.face_box(slot_b)) {
                                out.push((self.order[slot_a], other.order[slot_b]));
                            }
                        }
                    }
                }
                (BvhNodeKind::Inner { left, right }, _) => {
                    stack.push((right, j));
                    stack.push((left, j));
                }
                (BvhNodeKind::Leaf { .. }, BvhNodeKind::Inner { left, right }) => {
                    stack.push((i, right));
                    stack.push((i, left));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn build_node(
    boxes: &[Aabb],
    centers: &[Point3],
    order: &mut [u32],
    start: usize,
    count: usize,
    nodes: &mut Vec<BvhNode>,
) -> u32 {
    let span = &order[start..start + count];
    let mut aabb = boxes[span[0] as usize];
    for &f in &span[1..] {
        aabb = aabb.union(&boxes[f as usize]);
    }

    let id = nodes.len() as u32;
    nodes.push(BvhNode {
        aabb,
        count: count as u32,
        kind: BvhNodeKind::Leaf { start: start as u32 },
    });

    if count <= LEAF_SIZE {
        return id;
    }

    // Longest axis of the centroid bounds; ties broken by axis index.
    let mut cmin = centers[span[0] as usize];
    let mut cmax = cmin;
    for &f in &span[1..] {
        cmin = cmin.min_components(&centers[f as usize]);
        cmax = cmax.max_components(&centers[f as usize]);
    }
    let extents = [cmax.x - cmin.x, cmax.y - cmin.y, cmax.z - cmin.z];
    let mut axis = 0;
    for i in 1..3 {
        if extents[i] > extents[axis] {
            axis = i;
        }
    }

    // Total order on (centroid coordinate, face index) keeps the build
    // deterministic even with duplicated centroids.
    order[start..start + count].sort_unstable_by(|&fa, &fb| {
        let ca = centers[fa as usize].coord(axis);
        let cb = centers[fb as usize].coord(axis);
        ca.partial_cmp(&cb).unwrap().then(fa.cmp(&fb))
    });

    let half = count / 2;
    let left = build_node(boxes, centers, order, start, half, nodes);
    let right = build_node(boxes, centers, order, start + half, count - half, nodes);
    nodes[id as usize].kind = BvhNodeKind::Inner { left, right };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec3;
    use crate::shapes;

    #[test]
    fn empty_mesh_is_an_error() {
        assert_eq!(WindingBvh::build(&TriMesh::empty()).err(), Some(EmptyMesh));
    }

    #[test]
    fn single_face_is_one_leaf() {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![crate::mesh::Triangle::new(0, 1, 2)],
        )
        .unwrap();
        let bvh = WindingBvh::build(&mesh).unwrap();
        assert_eq!(bvh.nodes().len(), 1);
        assert_eq!(bvh.face_order(), &[0]);
        assert!(matches!(bvh.root().kind, BvhNodeKind::Leaf { start: 0 }));
        assert_eq!(bvh.root().count, 1);
    }

    #[test]
    fn leaves_partition_the_face_set() {
        let mesh = shapes::icosphere(1.0, 3);
        let bvh = WindingBvh::build(&mesh).unwrap();
        let mut seen = vec![false; mesh.face_count()];
        for node in bvh.nodes() {
            if let BvhNodeKind::Leaf { start } = node.kind {
                for i in 0..node.count {
                    let f = bvh.face_order()[(start + i) as usize] as usize;
                    assert!(!seen[f], "face {} appears in two leaves", f);
                    seen[f] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn node_boxes_contain_their_faces() {
        let mesh = shapes::icosphere(2.0, 2);
        let bvh = WindingBvh::build(&mesh).unwrap();
        // Walk down from the root, checking child containment along the way.
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = bvh.nodes()[i];
            match node.kind {
                BvhNodeKind::Inner { left, right } => {
                    assert!(node.aabb.contains_box(&bvh.nodes()[left as usize].aabb));
                    assert!(node.aabb.contains_box(&bvh.nodes()[right as usize].aabb));
                    assert_eq!(
                        node.count,
                        bvh.nodes()[left as usize].count + bvh.nodes()[right as usize].count
                    );
                    stack.push(left as usize);
                    stack.push(right as usize);
                }
                BvhNodeKind::Leaf { start } => {
                    for k in 0..node.count {
                        let f = bvh.face_order()[(start + k) as usize] as usize;
                        let fb = Aabb::of_points(&mesh.face_points(f));
                        assert!(node.aabb.contains_box(&fb));
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_pairs_disjoint_meshes() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(10.0, 0.0, 0.0));
        let ba = WindingBvh::build(&a).unwrap();
        let bb = WindingBvh::build(&b).unwrap();
        assert!(ba.overlap_pairs(&bb).is_empty());
    }

    #[test]
    fn overlap_pairs_identical_meshes_include_twins() {
        let a = shapes::unit_cube();
        let bvh = WindingBvh::build(&a).unwrap();
        let pairs = bvh.overlap_pairs(&bvh);
        for f in 0..a.face_count() as u32 {
            assert!(pairs.contains(&(f, f)));
        }
    }
}
