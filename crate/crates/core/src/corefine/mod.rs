//! Mutual refinement of two meshes at their intersections.
//!
//! After [`corefine`], every contact between the two meshes lies along shared
//! vertices and edges, except for registered coplanar duplicate face pairs.
//! The construction runs on exact rational coordinates; the refined meshes
//! round each constructed point to double precision exactly once, with both
//! meshes rounding shared points identically so downstream welding can match
//! on bit patterns.
//!
//! The approach, per face: collect the intersection segments the other mesh
//! imprints on it, split all segments at mutual crossings and at every point
//! incident to them, then re-triangulate the face around those constraints
//! with a canonical constrained Delaunay triangulation in its supporting
//! plane. Faces that overlap coplanar faces of the other mesh are pooled per
//! plane and triangulated from one shared arrangement, which forces the
//! overlap regions to decompose into identical "duplicate" triangles on both
//! sides.

mod cdt;
mod tri_tri;

pub use tri_tri::{
    tri_tri_intersect, tri_tri_intersect_exact, ContactFeature, SegmentEndpoint,
    SegmentGeometry, TriTriIntersection,
};

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;

use crate::exact::{
    in_triangle_2d, orient2d, ring_area_doubled, strictly_inside_segment_3d, PlaneKey, Rat,
    XPlane, XPoint, XPoint2,
};
use crate::mesh::{FaceProvenance, MeshSide, Point3, TriMesh, Triangle};
use crate::winding::WindingBvh;

use cdt::Cdt;

/// An exactly-identical face pair discovered after refinement: same vertex
/// positions, possibly opposite cyclic orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoplanarPair {
    pub face_a: u32,
    pub face_b: u32,
    pub same_orientation: bool,
}

/// A mutual intersection segment between two faces, as recorded during
/// refinement.
#[derive(Debug, Clone)]
pub struct IntersectionSegment {
    pub face_a: u32,
    pub face_b: u32,
    pub geometry: SegmentGeometry,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorefineDiagnostics {
    pub candidate_pairs: usize,
    pub segment_pairs: usize,
    pub point_contact_pairs: usize,
    pub coplanar_region_pairs: usize,
    pub degenerate_pairs_skipped: usize,
}

/// The two co-refined meshes plus everything needed to reason about them:
/// provenance maps, exact (pre-rounding) vertex coordinates, and the list of
/// coplanar duplicate pairs.
#[derive(Debug, Clone)]
pub struct RefinedPair {
    pub refined_a: TriMesh,
    pub refined_b: TriMesh,
    /// Refined face -> source face, per mesh.
    pub source_a: Vec<u32>,
    pub source_b: Vec<u32>,
    /// Exact coordinates of the refined vertices (parallel to the meshes'
    /// vertex lists); doubles in the meshes are these, correctly rounded.
    pub exact_a: Vec<XPoint>,
    pub exact_b: Vec<XPoint>,
    pub coplanar_pairs: Vec<CoplanarPair>,
    /// Mutual intersection segments recorded by the narrow phase, with the
    /// original face indices they were found on.
    pub segments: Vec<IntersectionSegment>,
    pub diagnostics: CorefineDiagnostics,
}

/// Broad phase: all face pairs whose axis-aligned boxes overlap. Superset of
/// the truly intersecting pairs.
pub fn candidate_pairs(a: &TriMesh, b: &TriMesh) -> Vec<(u32, u32)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let bvh_a = WindingBvh::build(a).expect("non-empty");
    let bvh_b = WindingBvh::build(b).expect("non-empty");
    bvh_a.overlap_pairs(&bvh_b)
}

#[derive(Debug, Default)]
struct Pool {
    pts: Vec<XPoint>,
    rounded: Vec<Point3>,
    index: BTreeMap<XPoint, u32>,
}

impl Pool {
    fn insert(&mut self, p: XPoint) -> u32 {
        if let Some(&id) = self.index.get(&p) {
            return id;
        }
        let id = self.pts.len() as u32;
        self.rounded.push(p.to_point3());
        self.index.insert(p.clone(), id);
        self.pts.push(p);
        id
    }

    fn get(&self, id: u32) -> &XPoint {
        &self.pts[id as usize]
    }
}

#[derive(Debug)]
struct FaceWork {
    corners: [u32; 3],
    plane: Option<XPlane>,
    axis: usize,
    group: Option<usize>,
    pts: BTreeSet<u32>,
    segs: BTreeSet<(u32, u32)>,
}

#[derive(Debug)]
struct PlaneGroup {
    plane: XPlane,
    axis: usize,
    pts: BTreeSet<u32>,
    segs: BTreeSet<(u32, u32)>,
}

fn seg_key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

fn init_faces(mesh: &TriMesh, pool: &mut Pool) -> Vec<FaceWork> {
    (0..mesh.face_count())
        .map(|f| {
            let [pa, pb, pc] = mesh.face_points(f);
            let corners = [
                pool.insert(XPoint::from_point3(&pa)),
                pool.insert(XPoint::from_point3(&pb)),
                pool.insert(XPoint::from_point3(&pc)),
            ];
            let plane = XPlane::from_triangle(
                pool.get(corners[0]),
                pool.get(corners[1]),
                pool.get(corners[2]),
            );
            let axis = plane.as_ref().map(XPlane::dominant_axis).unwrap_or(0);
            let mut pts = BTreeSet::new();
            pts.extend(corners);
            FaceWork {
                corners,
                plane,
                axis,
                group: None,
                pts,
                segs: BTreeSet::new(),
            }
        })
        .collect()
}

fn enroll(fw: &mut FaceWork, gid: usize, groups: &mut [PlaneGroup]) {
    if fw.group == Some(gid) {
        return;
    }
    debug_assert!(fw.group.is_none(), "a face lies in exactly one plane");
    fw.group = Some(gid);
    let g = &mut groups[gid];
    g.pts.extend(fw.pts.iter().copied());
    g.segs.extend(fw.segs.iter().copied());
    fw.segs.clear();
    // The face's own boundary becomes part of the shared plane arrangement.
    for i in 0..3 {
        g.segs.insert(seg_key(fw.corners[i], fw.corners[(i + 1) % 3]));
    }
}

fn add_seg(fw: &mut FaceWork, groups: &mut [PlaneGroup], e0: u32, e1: u32) {
    let key = seg_key(e0, e1);
    match fw.group {
        Some(g) => {
            groups[g].segs.insert(key);
            groups[g].pts.extend([e0, e1]);
        }
        None => {
            fw.segs.insert(key);
            fw.pts.extend([e0, e1]);
        }
    }
}

/// Pairwise proper crossings between the owner's segments, constructed in the
/// owner's plane and registered as new points.
fn owner_crossings(
    segs: &BTreeSet<(u32, u32)>,
    plane: &XPlane,
    axis: usize,
    pool: &mut Pool,
) -> Vec<u32> {
    let segs: Vec<(u32, u32)> = segs.iter().copied().collect();
    let mut proj: BTreeMap<u32, XPoint2> = BTreeMap::new();
    for &(a, b) in &segs {
        proj.entry(a).or_insert_with(|| pool.get(a).project(axis));
        proj.entry(b).or_insert_with(|| pool.get(b).project(axis));
    }
    let mut crossings: Vec<XPoint> = Vec::new();
    for i in 0..segs.len() {
        let (a1, b1) = segs[i];
        for &(a2, b2) in &segs[i + 1..] {
            if a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2 {
                continue; // sharing an endpoint precludes a proper crossing
            }
            let (p1, q1) = (&proj[&a1], &proj[&b1]);
            let (p2, q2) = (&proj[&a2], &proj[&b2]);
            let o1 = orient2d(p1, q1, p2);
            let o2 = orient2d(p1, q1, q2);
            let o3 = orient2d(p2, q2, p1);
            let o4 = orient2d(p2, q2, q1);
            if o1 * o2 < 0 && o3 * o4 < 0 {
                let x = crate::exact::segment_crossing_2d(p1, q1, p2, q2);
                crossings.push(plane.lift(&x, axis));
            }
        }
    }
    crossings.into_iter().map(|p| pool.insert(p)).collect()
}

/// Split every segment at each registered point lying on it; the resulting
/// sub-segments meet only at endpoints.
fn split_segments(
    segs: &BTreeSet<(u32, u32)>,
    pts: &BTreeSet<u32>,
    pool: &Pool,
) -> BTreeSet<(u32, u32)> {
    let mut out = BTreeSet::new();
    for &(a, b) in segs {
        if a == b {
            continue;
        }
        let pa = pool.get(a);
        let pb = pool.get(b);
        // Dominant axis of the direction is strictly monotone along the
        // segment, so it sorts interior points unambiguously.
        let dir: Vec<Rat> = (0..3).map(|k| (&pb.0[k] - &pa.0[k]).abs()).collect();
        let mut axis = 0;
        for k in 1..3 {
            if dir[k] > dir[axis] {
                axis = k;
            }
        }
        let mut on: Vec<(Rat, u32)> = vec![(pa.0[axis].clone(), a), (pb.0[axis].clone(), b)];
        for &p in pts {
            if p != a && p != b && strictly_inside_segment_3d(pool.get(p), pa, pb) {
                on.push((pool.get(p).0[axis].clone(), p));
            }
        }
        on.sort();
        for w in on.windows(2) {
            if w[0].1 != w[1].1 {
                out.insert(seg_key(w[0].1, w[1].1));
            }
        }
    }
    out
}

/// Refine both meshes so mutual intersections lie along shared vertices and
/// edges, and register coplanar duplicate pairs. Inputs may be open,
/// non-manifold, or self-intersecting; self-intersections within one mesh are
/// left alone.
pub fn corefine(a: &TriMesh, b: &TriMesh) -> RefinedPair {
    let mut pool = Pool::default();
    let mut faces_a = init_faces(a, &mut pool);
    let mut faces_b = init_faces(b, &mut pool);
    let mut groups: Vec<PlaneGroup> = Vec::new();
    let mut group_index: BTreeMap<PlaneKey, usize> = BTreeMap::new();
    let mut diagnostics = CorefineDiagnostics::default();

    let pairs = candidate_pairs(a, b);
    diagnostics.candidate_pairs = pairs.len();
    let mut segments: Vec<IntersectionSegment> = Vec::new();

    for (fa, fb) in pairs {
        let (fa, fb) = (fa as usize, fb as usize);
        if faces_a[fa].plane.is_none() || faces_b[fb].plane.is_none() {
            diagnostics.degenerate_pairs_skipped += 1;
            continue;
        }
        let ta: Vec<XPoint> = faces_a[fa].corners.iter().map(|&c| pool.get(c).clone()).collect();
        let tb: Vec<XPoint> = faces_b[fb].corners.iter().map(|&c| pool.get(c).clone()).collect();
        let hit = tri_tri_intersect_exact([&ta[0], &ta[1], &ta[2]], [&tb[0], &tb[1], &tb[2]]);
        match hit {
            TriTriIntersection::None => {}
            TriTriIntersection::DegenerateInput => {
                diagnostics.degenerate_pairs_skipped += 1;
            }
            TriTriIntersection::Point(_) => {
                diagnostics.point_contact_pairs += 1;
            }
            TriTriIntersection::Segment(seg) => {
                let e0 = pool.insert(seg.endpoints[0].exact.clone());
                let e1 = pool.insert(seg.endpoints[1].exact.clone());
                if e0 == e1 {
                    diagnostics.point_contact_pairs += 1;
                } else {
                    add_seg(&mut faces_a[fa], &mut groups, e0, e1);
                    add_seg(&mut faces_b[fb], &mut groups, e0, e1);
                    diagnostics.segment_pairs += 1;
                    segments.push(IntersectionSegment {
                        face_a: fa as u32,
                        face_b: fb as u32,
                        geometry: seg,
                    });
                }
            }
            TriTriIntersection::CoplanarOverlap { .. } => {
                let key = faces_a[fa].plane.as_ref().unwrap().canonical_key();
                let gid = *group_index.entry(key).or_insert_with(|| {
                    groups.push(PlaneGroup {
                        plane: faces_a[fa].plane.clone().unwrap(),
                        axis: faces_a[fa].axis,
                        pts: BTreeSet::new(),
                        segs: BTreeSet::new(),
                    });
                    groups.len() - 1
                });
                enroll(&mut faces_a[fa], gid, &mut groups);
                enroll(&mut faces_b[fb], gid, &mut groups);
                diagnostics.coplanar_region_pairs += 1;
            }
        }
    }

    // Construct crossing points inside every arrangement.
    for g in 0..groups.len() {
        let new_pts = {
            let grp = &groups[g];
            owner_crossings(&grp.segs, &grp.plane, grp.axis, &mut pool)
        };
        groups[g].pts.extend(new_pts);
    }
    for faces in [&mut faces_a, &mut faces_b] {
        for fw in faces.iter_mut() {
            if fw.group.is_some() || fw.segs.len() < 2 {
                continue;
            }
            let plane = fw.plane.clone().unwrap();
            let new_pts = owner_crossings(&fw.segs, &plane, fw.axis, &mut pool);
            fw.pts.extend(new_pts);
        }
    }

    // Propagate point incidences: every pooled point that lies on a segment
    // or on a face's boundary edge splits it, on whichever mesh it lives.
    // This is what stitches T-vertices across the two meshes and between
    // neighboring faces of the same mesh.
    let n_pts = pool.pts.len() as u32;
    for g in groups.iter_mut() {
        let segs: Vec<(u32, u32)> = g.segs.iter().copied().collect();
        for pid in 0..n_pts {
            if g.pts.contains(&pid) {
                continue;
            }
            let p = pool.get(pid);
            if segs.iter().any(|&(sa, sb)| {
                pid != sa && pid != sb && strictly_inside_segment_3d(p, pool.get(sa), pool.get(sb))
            }) {
                g.pts.insert(pid);
            }
        }
    }
    for faces in [&mut faces_a, &mut faces_b] {
        for fw in faces.iter_mut() {
            if fw.group.is_some() || fw.plane.is_none() {
                continue;
            }
            let mut carriers: Vec<(u32, u32)> = fw.segs.iter().copied().collect();
            for i in 0..3 {
                carriers.push(seg_key(fw.corners[i], fw.corners[(i + 1) % 3]));
            }
            for pid in 0..n_pts {
                if fw.pts.contains(&pid) {
                    continue;
                }
                let p = pool.get(pid);
                if carriers.iter().any(|&(sa, sb)| {
                    pid != sa
                        && pid != sb
                        && strictly_inside_segment_3d(p, pool.get(sa), pool.get(sb))
                }) {
                    fw.pts.insert(pid);
                }
            }
        }
    }
    // Grouped faces additionally split at points on their boundary edges that
    // entered the pool via the group arrangement (boundary edges are group
    // segments, so those points are already in group.pts).

    // Split all segments into crossing-free sub-segments.
    let group_final: Vec<BTreeSet<(u32, u32)>> = groups
        .iter()
        .map(|g| split_segments(&g.segs, &g.pts, &pool))
        .collect();

    // Re-triangulate each face.
    let mut tris_out: [Vec<OutFace>; 2] = [Vec::new(), Vec::new()];
    let mut sources_out: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    for (side, faces) in [&faces_a, &faces_b].into_iter().enumerate() {
        let mesh = if side == 0 { a } else { b };
        for (f, fw) in faces.iter().enumerate() {
            if fw.plane.is_none() {
                tris_out[side].push(OutFace::Original(mesh.faces()[f]));
                sources_out[side].push(f as u32);
                continue;
            }
            let (cand_pts, cand_segs): (BTreeSet<u32>, Vec<(u32, u32)>) = match fw.group {
                Some(g) => {
                    let grp = &groups[g];
                    let axis = fw.axis;
                    let c2: Vec<XPoint2> =
                        fw.corners.iter().map(|&c| pool.get(c).project(axis)).collect();
                    let ccw = orient2d(&c2[0], &c2[1], &c2[2]) > 0;
                    let (t0, t1, t2) = if ccw {
                        (&c2[0], &c2[1], &c2[2])
                    } else {
                        (&c2[0], &c2[2], &c2[1])
                    };
                    let mut pts: BTreeSet<u32> = fw.corners.iter().copied().collect();
                    for &p in &grp.pts {
                        if in_triangle_2d(&pool.get(p).project(axis), t0, t1, t2) {
                            pts.insert(p);
                        }
                    }
                    let segs = group_final[g]
                        .iter()
                        .copied()
                        .filter(|(sa, sb)| pts.contains(sa) && pts.contains(sb))
                        .collect();
                    (pts, segs)
                }
                None => {
                    let finals = split_segments(&fw.segs, &fw.pts, &pool);
                    (fw.pts.clone(), finals.into_iter().collect())
                }
            };

            let has_extra = cand_pts.iter().any(|p| !fw.corners.contains(p));
            if !has_extra {
                tris_out[side].push(OutFace::Original(mesh.faces()[f]));
                sources_out[side].push(f as u32);
                continue;
            }

            for tri in refine_face(fw, &pool, &cand_pts, &cand_segs) {
                tris_out[side].push(OutFace::Constructed(tri));
                sources_out[side].push(f as u32);
            }
        }
    }

    let (refined_a, exact_a) = build_mesh(a, &tris_out[0], &sources_out[0], &pool, MeshSide::A);
    let (refined_b, exact_b) = build_mesh(b, &tris_out[1], &sources_out[1], &pool, MeshSide::B);

    let pair = RefinedPair {
        refined_a,
        refined_b,
        source_a: sources_out[0].clone(),
        source_b: sources_out[1].clone(),
        exact_a,
        exact_b,
        coplanar_pairs: Vec::new(),
        segments,
        diagnostics,
    };
    detect_coplanar_duplicates(pair)
}

fn refine_face(
    fw: &FaceWork,
    pool: &Pool,
    cand_pts: &BTreeSet<u32>,
    cand_segs: &[(u32, u32)],
) -> Vec<[u32; 3]> {
    let axis = fw.axis;
    let c2: Vec<XPoint2> = fw.corners.iter().map(|&c| pool.get(c).project(axis)).collect();
    let flip = orient2d(&c2[0], &c2[1], &c2[2]) < 0;
    let order: [usize; 3] = if flip { [0, 2, 1] } else { [0, 1, 2] };

    let mut cdt = Cdt::new(
        c2[order[0]].clone(),
        c2[order[1]].clone(),
        c2[order[2]].clone(),
    );
    let mut vmap: Vec<u32> = order.iter().map(|&i| fw.corners[i]).collect();
    let mut id2cdt: BTreeMap<u32, usize> = vmap
        .iter()
        .enumerate()
        .map(|(i, &pid)| (pid, i))
        .collect();

    let mut extra: Vec<(XPoint2, u32)> = cand_pts
        .iter()
        .filter(|p| !fw.corners.contains(p))
        .map(|&p| (pool.get(p).project(axis), p))
        .collect();
    extra.sort();
    for (p2, pid) in extra {
        let v = cdt.insert(p2);
        if v == vmap.len() {
            vmap.push(pid);
        } else {
            debug_assert_eq!(vmap[v], pid, "distinct pool points may not coincide in 2D");
        }
        id2cdt.insert(pid, v);
    }

    for &(sa, sb) in cand_segs {
        cdt.insert_constraint(id2cdt[&sa], id2cdt[&sb]);
    }
    cdt.canonicalize();

    cdt.triangles()
        .into_iter()
        .map(|t| {
            let tri = [vmap[t[0]], vmap[t[1]], vmap[t[2]]];
            if flip {
                [tri[0], tri[2], tri[1]]
            } else {
                tri
            }
        })
        .collect()
}

/// One face of a refined mesh: either an untouched original face (keeping
/// its exact index structure) or a constructed pool-id triple.
#[derive(Debug, Clone, Copy)]
enum OutFace {
    Original(Triangle),
    Constructed([u32; 3]),
}

/// Assemble a refined mesh. The original vertex list is kept verbatim (up to
/// the canonical rounding of coordinates), constructed points are appended,
/// so an untouched mesh comes back structurally identical.
fn build_mesh(
    orig: &TriMesh,
    tris: &[OutFace],
    sources: &[u32],
    pool: &Pool,
    side: MeshSide,
) -> (TriMesh, Vec<XPoint>) {
    let mut verts: Vec<Point3> = Vec::new();
    let mut exact: Vec<XPoint> = Vec::new();
    let mut local: BTreeMap<u32, u32> = BTreeMap::new();
    for v in orig.vertices() {
        let x = XPoint::from_point3(v);
        match pool.index.get(&x) {
            Some(&pid) => {
                verts.push(pool.rounded[pid as usize]);
                local.entry(pid).or_insert((verts.len() - 1) as u32);
            }
            // Unreferenced original vertex: never pooled, kept as-is.
            None => verts.push(x.to_point3()),
        }
        exact.push(x);
    }

    let mut faces: Vec<Triangle> = Vec::new();
    let mut prov: Vec<FaceProvenance> = Vec::new();
    for (i, t) in tris.iter().enumerate() {
        let tri = match t {
            OutFace::Original(tri) => *tri,
            OutFace::Constructed(pids) => {
                let mut li = [0u32; 3];
                for (k, pid) in pids.iter().enumerate() {
                    li[k] = *local.entry(*pid).or_insert_with(|| {
                        verts.push(pool.rounded[*pid as usize]);
                        exact.push(pool.get(*pid).clone());
                        (verts.len() - 1) as u32
                    });
                }
                Triangle::new(li[0], li[1], li[2])
            }
        };
        faces.push(tri);
        prov.push(FaceProvenance {
            source: side,
            original_face: sources[i],
        });
    }

    let mesh = TriMesh::with_provenance(verts, faces, prov).expect("refined mesh is well-formed");
    (mesh, exact)
}

/// Recompute the coplanar duplicate list of a refined pair: exactly the face
/// pairs with identical exact vertex position sets, with the orientation flag
/// from their cyclic orders. Greedy one-to-one matching in face order when a
/// position set repeats within one mesh.
pub fn detect_coplanar_duplicates(mut pair: RefinedPair) -> RefinedPair {
    let mut point_ids: BTreeMap<&XPoint, u32> = BTreeMap::new();
    for p in pair.exact_a.iter().chain(pair.exact_b.iter()) {
        let next = point_ids.len() as u32;
        point_ids.entry(p).or_insert(next);
    }
    let face_gids = |mesh: &TriMesh, exact: &[XPoint]| -> Vec<[u32; 3]> {
        mesh.faces()
            .iter()
            .map(|t| {
                [
                    point_ids[&exact[t.v0 as usize]],
                    point_ids[&exact[t.v1 as usize]],
                    point_ids[&exact[t.v2 as usize]],
                ]
            })
            .collect()
    };
    let gids_a = face_gids(&pair.refined_a, &pair.exact_a);
    let gids_b = face_gids(&pair.refined_b, &pair.exact_b);

    let sorted_key = |t: &[u32; 3]| {
        let mut k = *t;
        k.sort_unstable();
        k
    };

    let mut by_key: BTreeMap<[u32; 3], Vec<u32>> = BTreeMap::new();
    for (f, t) in gids_a.iter().enumerate() {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            continue; // degenerate copies can't be meaningful duplicates
        }
        by_key.entry(sorted_key(t)).or_default().push(f as u32);
    }

    let mut pairs = Vec::new();
    for (f, t) in gids_b.iter().enumerate() {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            continue;
        }
        if let Some(list) = by_key.get_mut(&sorted_key(t)) {
            if let Some(face_a) = list.first().copied() {
                list.remove(0);
                let same_orientation = cyclic_match(&gids_a[face_a as usize], t);
                pairs.push(CoplanarPair {
                    face_a,
                    face_b: f as u32,
                    same_orientation,
                });
            }
        }
    }
    pairs.sort_by_key(|p| (p.face_a, p.face_b));
    pair.coplanar_pairs = pairs;
    pair
}

/// Do two triangles over the same three distinct points have the same cyclic
/// orientation?
fn cyclic_match(a: &[u32; 3], b: &[u32; 3]) -> bool {
    let r = (0..3).find(|&r| b[r] == a[0]).expect("same point sets");
    b[(r + 1) % 3] == a[1]
}

/// Exhaustive exact audit of a refined pair against its inputs.
#[derive(Debug, Default)]
pub struct RefinementAudit {
    /// Contacts that are neither shared vertices/edges nor registered
    /// coplanar duplicates. Refinement is correct iff this is empty.
    pub residual_violations: Vec<String>,
    /// Refined faces whose vertices leave their source face's exact plane.
    pub plane_violations: usize,
    /// Exact per-source-face area conservation (projected rational areas).
    pub area_conserved: bool,
    /// Every refined face maps to a valid source face.
    pub provenance_total: bool,
    /// Zero-dimensional contacts (shared or touching vertices); these are
    /// closed-measure and do not affect classification.
    pub point_touches: usize,
}

impl RefinementAudit {
    pub fn is_clean(&self) -> bool {
        self.residual_violations.is_empty()
            && self.plane_violations == 0
            && self.area_conserved
            && self.provenance_total
    }
}

/// Exact all-pairs narrow phase used as an oracle in tests: every pair whose
/// exact intersection is non-trivial.
pub fn brute_force_intersecting_pairs(a: &TriMesh, b: &TriMesh) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for fa in 0..a.face_count() {
        let [pa, qa, ra] = a.face_points(fa);
        let ta = [
            XPoint::from_point3(&pa),
            XPoint::from_point3(&qa),
            XPoint::from_point3(&ra),
        ];
        for fb in 0..b.face_count() {
            let [pb, qb, rb] = b.face_points(fb);
            let tb = [
                XPoint::from_point3(&pb),
                XPoint::from_point3(&qb),
                XPoint::from_point3(&rb),
            ];
            match tri_tri_intersect_exact([&ta[0], &ta[1], &ta[2]], [&tb[0], &tb[1], &tb[2]]) {
                TriTriIntersection::None | TriTriIntersection::DegenerateInput => {}
                _ => out.push((fa as u32, fb as u32)),
            }
        }
    }
    out
}

pub fn audit_refinement(a: &TriMesh, b: &TriMesh, pair: &RefinedPair) -> RefinementAudit {
    let mut audit = RefinementAudit {
        area_conserved: true,
        provenance_total: true,
        ..Default::default()
    };

    // Provenance totality.
    audit.provenance_total = pair.source_a.len() == pair.refined_a.face_count()
        && pair.source_b.len() == pair.refined_b.face_count()
        && pair.source_a.iter().all(|&s| (s as usize) < a.face_count())
        && pair.source_b.iter().all(|&s| (s as usize) < b.face_count());
    if !audit.provenance_total {
        return audit;
    }

    // Plane fidelity and exact area conservation, per input mesh.
    for (orig, refined, exact, sources) in [
        (a, &pair.refined_a, &pair.exact_a, &pair.source_a),
        (b, &pair.refined_b, &pair.exact_b, &pair.source_b),
    ] {
        let orig_exact: Vec<[XPoint; 3]> = (0..orig.face_count())
            .map(|f| {
                let [p, q, r] = orig.face_points(f);
                [
                    XPoint::from_point3(&p),
                    XPoint::from_point3(&q),
                    XPoint::from_point3(&r),
                ]
            })
            .collect();
        let planes: Vec<Option<XPlane>> = orig_exact
            .iter()
            .map(|[p, q, r]| XPlane::from_triangle(p, q, r))
            .collect();

        let mut area_sum: Vec<Rat> = planes
            .iter()
            .map(|_| Rat::from_integer(0.into()))
            .collect();
        for (f, tri) in refined.faces().iter().enumerate() {
            let src = sources[f] as usize;
            let Some(plane) = &planes[src] else { continue };
            let corners = [
                &exact[tri.v0 as usize],
                &exact[tri.v1 as usize],
                &exact[tri.v2 as usize],
            ];
            if corners.iter().any(|p| !plane.contains(p)) {
                audit.plane_violations += 1;
                continue;
            }
            let axis = plane.dominant_axis();
            let ring = [
                corners[0].project(axis),
                corners[1].project(axis),
                corners[2].project(axis),
            ];
            area_sum[src] += ring_area_doubled(&ring);
        }
        for (src, plane) in planes.iter().enumerate() {
            let Some(plane) = plane else { continue };
            let axis = plane.dominant_axis();
            let ring = [
                orig_exact[src][0].project(axis),
                orig_exact[src][1].project(axis),
                orig_exact[src][2].project(axis),
            ];
            if area_sum[src] != ring_area_doubled(&ring) {
                audit.area_conserved = false;
            }
        }
    }

    // Residual intersections: exact narrow phase over box-overlapping pairs
    // of refined faces.
    if pair.refined_a.is_empty() || pair.refined_b.is_empty() {
        return audit;
    }
    let dup: BTreeSet<(u32, u32)> = pair
        .coplanar_pairs
        .iter()
        .map(|p| (p.face_a, p.face_b))
        .collect();
    let bvh_a = WindingBvh::build(&pair.refined_a).expect("non-empty");
    let bvh_b = WindingBvh::build(&pair.refined_b).expect("non-empty");
    for (fa, fb) in bvh_a.overlap_pairs(&bvh_b) {
        let ta = pair.refined_a.faces()[fa as usize];
        let tb = pair.refined_b.faces()[fb as usize];
        let ca = [
            &pair.exact_a[ta.v0 as usize],
            &pair.exact_a[ta.v1 as usize],
            &pair.exact_a[ta.v2 as usize],
        ];
        let cb = [
            &pair.exact_b[tb.v0 as usize],
            &pair.exact_b[tb.v1 as usize],
            &pair.exact_b[tb.v2 as usize],
        ];
        match tri_tri_intersect_exact(ca, cb) {
            TriTriIntersection::None | TriTriIntersection::DegenerateInput => {}
            TriTriIntersection::Point(_) => audit.point_touches += 1,
            TriTriIntersection::Segment(seg) => {
                let on = |corners: &[&XPoint; 3], p: &XPoint| corners.iter().any(|c| *c == p);
                let shared_edge = seg.endpoints.iter().all(|ep| on(&ca, &ep.exact))
                    && seg.endpoints.iter().all(|ep| on(&cb, &ep.exact));
                if !shared_edge {
                    audit.residual_violations.push(format!(
                        "faces A#{fa} and B#{fb} still cross along a segment"
                    ));
                }
            }
            TriTriIntersection::CoplanarOverlap { .. } => {
                if !dup.contains(&(fa, fb)) {
                    audit.residual_violations.push(format!(
                        "faces A#{fa} and B#{fb} overlap coplanar but are not duplicates"
                    ));
                }
            }
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec3;
    use crate::shapes;

    fn assert_clean(a: &TriMesh, b: &TriMesh, pair: &RefinedPair) {
        let audit = audit_refinement(a, b, pair);
        assert!(
            audit.is_clean(),
            "refinement audit failed: {:?} plane={} area={} prov={}",
            audit.residual_violations,
            audit.plane_violations,
            audit.area_conserved,
            audit.provenance_total,
        );
    }

    #[test]
    fn disjoint_cubes_are_untouched() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(5.0, 0.0, 0.0));
        let pair = corefine(&a, &b);
        assert_eq!(pair.refined_a.faces(), a.faces());
        assert_eq!(pair.refined_a.vertices(), a.vertices());
        assert_eq!(pair.refined_b.faces(), b.faces());
        assert!(pair.coplanar_pairs.is_empty());
        assert_clean(&a, &b, &pair);
    }

    #[test]
    fn corner_overlap_refines_both_cubes() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(0.5, 0.5, 0.5));
        let pair = corefine(&a, &b);
        assert!(pair.refined_a.face_count() > 12);
        assert!(pair.refined_b.face_count() > 12);
        assert!(pair.coplanar_pairs.is_empty());
        assert!(pair.diagnostics.segment_pairs > 0);
        // Refinement preserves each mesh's own watertightness.
        assert!(pair.refined_a.audit().is_closed);
        assert!(pair.refined_b.audit().is_closed);
        assert_clean(&a, &b, &pair);

        // Recorded segments: one per segment pair, endpoints exactly on both
        // supporting planes.
        assert_eq!(pair.segments.len(), pair.diagnostics.segment_pairs);
        for seg in &pair.segments {
            let plane_of = |mesh: &TriMesh, f: u32| {
                let [p, q, r] = mesh.face_points(f as usize);
                XPlane::from_triangle(
                    &XPoint::from_point3(&p),
                    &XPoint::from_point3(&q),
                    &XPoint::from_point3(&r),
                )
                .unwrap()
            };
            let pa = plane_of(&a, seg.face_a);
            let pb = plane_of(&b, seg.face_b);
            for ep in &seg.geometry.endpoints {
                assert!(pa.contains(&ep.exact));
                assert!(pb.contains(&ep.exact));
            }
        }
    }

    #[test]
    fn identical_cubes_become_all_duplicates() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube();
        let pair = corefine(&a, &b);
        assert_eq!(pair.refined_a.face_count(), 12);
        assert_eq!(pair.refined_b.face_count(), 12);
        assert_eq!(pair.coplanar_pairs.len(), 12);
        assert!(pair.coplanar_pairs.iter().all(|p| p.same_orientation));
        assert_clean(&a, &b, &pair);
    }

    #[test]
    fn face_sharing_cubes_have_opposite_duplicates() {
        let a = shapes::unit_cube();
        let b = shapes::box_mesh(
            crate::mesh::Point3::new(1.0, 0.0, 0.0),
            crate::mesh::Point3::new(2.0, 1.0, 1.0),
        );
        let pair = corefine(&a, &b);
        assert_eq!(pair.coplanar_pairs.len(), 2, "the shared wall is two triangles");
        assert!(pair.coplanar_pairs.iter().all(|p| !p.same_orientation));
        assert_clean(&a, &b, &pair);
    }

    #[test]
    fn partially_overlapping_coplanar_faces_subdivide_into_duplicates() {
        // Shifted along x and y: the z = 0 and z = 1 planes carry partial
        // rectangular overlaps that must decompose identically on both sides.
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(0.5, 0.5, 0.0));
        let pair = corefine(&a, &b);
        assert!(!pair.coplanar_pairs.is_empty());
        assert!(pair.refined_a.audit().is_closed);
        assert!(pair.refined_b.audit().is_closed);
        assert_clean(&a, &b, &pair);
    }

    #[test]
    fn peg_through_face_interior_creates_hole_loop() {
        // A thin tall box rising through the strict interior of one triangle
        // of the cube's top face: the imprinted loop touches no triangle
        // boundary, exercising constraints that enclose an island.
        let a = shapes::unit_cube();
        let b = shapes::box_mesh(
            crate::mesh::Point3::new(0.1, 0.6, 0.5),
            crate::mesh::Point3::new(0.3, 0.9, 1.5),
        );
        let pair = corefine(&a, &b);
        assert!(pair.refined_a.audit().is_closed);
        assert!(pair.refined_b.audit().is_closed);
        assert_clean(&a, &b, &pair);
    }

    #[test]
    fn corefine_is_symmetric_in_its_arguments() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(0.5, 0.25, 0.75));
        let ab = corefine(&a, &b);
        let ba = corefine(&b, &a);
        let set_ab: std::collections::BTreeSet<XPoint> = ab
            .exact_a
            .iter()
            .chain(ab.exact_b.iter())
            .cloned()
            .collect();
        let set_ba: std::collections::BTreeSet<XPoint> = ba
            .exact_a
            .iter()
            .chain(ba.exact_b.iter())
            .cloned()
            .collect();
        assert_eq!(set_ab, set_ba);
    }

    #[test]
    fn candidate_pairs_cover_all_exact_intersections() {
        let a = shapes::unit_cube();
        let b = shapes::unit_cube().translated(Vec3::new(0.5, 0.5, 0.25));
        let candidates: std::collections::BTreeSet<(u32, u32)> =
            candidate_pairs(&a, &b).into_iter().collect();
        for pair in brute_force_intersecting_pairs(&a, &b) {
            assert!(candidates.contains(&pair), "missing candidate {pair:?}");
        }
    }

    #[test]
    fn degenerate_faces_are_skipped_and_counted() {
        let mut vertices: Vec<crate::mesh::Point3> = shapes::unit_cube().vertices().to_vec();
        let mut faces = shapes::unit_cube().faces().to_vec();
        // A zero-area sliver crossing the other cube.
        let n = vertices.len() as u32;
        vertices.push(crate::mesh::Point3::new(-1.0, 0.5, 0.5));
        vertices.push(crate::mesh::Point3::new(2.0, 0.5, 0.5));
        vertices.push(crate::mesh::Point3::new(0.5, 0.5, 0.5));
        faces.push(Triangle::new(n, n + 1, n + 2));
        let a = TriMesh::new(vertices, faces).unwrap();
        let b = shapes::unit_cube().translated(Vec3::new(0.5, 0.0, 0.0));
        let pair = corefine(&a, &b);
        assert!(pair.diagnostics.degenerate_pairs_skipped > 0);
        // The degenerate face is carried through unchanged.
        assert_eq!(
            pair.refined_a
                .faces()
                .iter()
                .zip(&pair.source_a)
                .filter(|(_, &src)| src == 12)
                .count(),
            1
        );
    }

    #[test]
    fn point_contacts_are_ignored_for_refinement() {
        // B's corner touches the interior of A's top face at one point.
        let a = shapes::unit_cube();
        let b = shapes::box_mesh(
            crate::mesh::Point3::new(0.25, 0.6, 1.0),
            crate::mesh::Point3::new(1.25, 1.6, 2.0),
        );
        // Shift so only the corner (0.25, 0.6, 1.0) touches z=1 within A.
        let pair = corefine(&a, &b);
        assert!(pair.diagnostics.point_contact_pairs > 0 || pair.diagnostics.segment_pairs > 0);
        assert_clean(&a, &b, &pair);
    }
}
