//! Exact triangle-triangle intersection classification.
//!
//! Works entirely in rational arithmetic: the result is an exact description
//! of the contact (nothing, a point, a segment, or a coplanar overlap
//! polygon), with constructed points carried both exactly and rounded.

use num_traits::{Signed, Zero};

use crate::exact::{
    clip_convex, dedupe_ring, on_segment_3d, orient2d, ring_area_doubled, sign, Rat, XPlane,
    XPoint, XPoint2,
};
use crate::mesh::Point3;

/// Which feature of a triangle a contact point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactFeature {
    /// Corner `i` (0..3).
    Vertex(u8),
    /// Interior of edge `i` (from corner i to corner i+1).
    Edge(u8),
    /// Strict interior of the face.
    Interior,
}

/// One endpoint of an intersection segment: exact coordinates, their rounded
/// double representation, and the feature classification on each input
/// triangle.
#[derive(Debug, Clone)]
pub struct SegmentEndpoint {
    pub exact: XPoint,
    pub rounded: Point3,
    pub on_a: ContactFeature,
    pub on_b: ContactFeature,
}

/// A segment where two triangles cross, with endpoints on both supporting
/// planes.
#[derive(Debug, Clone)]
pub struct SegmentGeometry {
    pub endpoints: [SegmentEndpoint; 2],
}

/// Exact classification of a triangle pair contact.
#[derive(Debug, Clone)]
pub enum TriTriIntersection {
    None,
    /// An input triangle is exactly collinear; the pair is skipped.
    DegenerateInput,
    /// Single-point contact; ignored for refinement.
    Point(XPoint),
    Segment(SegmentGeometry),
    /// Coplanar triangles with positive-area overlap; the polygon is convex,
    /// 3..=6 exact vertices, counter-clockwise in the dominant projection.
    CoplanarOverlap { polygon: Vec<XPoint> },
}

/// Exact intersection of triangles given in double precision.
/// Symmetric: swapping the triangles yields the same contact geometry.
pub fn tri_tri_intersect(
    a0: Point3,
    a1: Point3,
    a2: Point3,
    b0: Point3,
    b1: Point3,
    b2: Point3,
) -> TriTriIntersection {
    let a = [
        XPoint::from_point3(&a0),
        XPoint::from_point3(&a1),
        XPoint::from_point3(&a2),
    ];
    let b = [
        XPoint::from_point3(&b0),
        XPoint::from_point3(&b1),
        XPoint::from_point3(&b2),
    ];
    tri_tri_intersect_exact([&a[0], &a[1], &a[2]], [&b[0], &b[1], &b[2]])
}

/// Feature of triangle `t` that `p` lies on, assuming `p` is on the
/// triangle's plane and within it.
pub fn classify_on_triangle(p: &XPoint, t: [&XPoint; 3]) -> ContactFeature {
    for (i, v) in t.iter().enumerate() {
        if p == *v {
            return ContactFeature::Vertex(i as u8);
        }
    }
    for i in 0..3 {
        if on_segment_3d(p, t[i], t[(i + 1) % 3]) {
            return ContactFeature::Edge(i as u8);
        }
    }
    ContactFeature::Interior
}

/// Exact-coordinate version of [`tri_tri_intersect`].
pub fn tri_tri_intersect_exact(a: [&XPoint; 3], b: [&XPoint; 3]) -> TriTriIntersection {
    let Some(plane_a) = XPlane::from_triangle(a[0], a[1], a[2]) else {
        return TriTriIntersection::DegenerateInput;
    };
    let Some(plane_b) = XPlane::from_triangle(b[0], b[1], b[2]) else {
        return TriTriIntersection::DegenerateInput;
    };

    let hb: Vec<Rat> = b.iter().map(|p| plane_a.height(p)).collect();
    let sb: Vec<i8> = hb.iter().map(sign).collect();
    if sb.iter().all(|&s| s > 0) || sb.iter().all(|&s| s < 0) {
        return TriTriIntersection::None;
    }
    if sb.iter().all(|&s| s == 0) {
        return coplanar_overlap(a, b, &plane_a);
    }

    let ha: Vec<Rat> = a.iter().map(|p| plane_b.height(p)).collect();
    let sa: Vec<i8> = ha.iter().map(sign).collect();
    if sa.iter().all(|&s| s > 0) || sa.iter().all(|&s| s < 0) {
        return TriTriIntersection::None;
    }

    // Both triangles straddle or touch the other's plane: their contacts with
    // the common line are intervals; intersect them.
    let pts_a = plane_crossings(a, &ha, &sa);
    let pts_b = plane_crossings(b, &hb, &sb);
    debug_assert!(!pts_a.is_empty() && !pts_b.is_empty());

    // Parameterize the common line by its dominant coordinate.
    let axis = {
        let d = [
            &plane_a.normal[1] * &plane_b.normal[2] - &plane_a.normal[2] * &plane_b.normal[1],
            &plane_a.normal[2] * &plane_b.normal[0] - &plane_a.normal[0] * &plane_b.normal[2],
            &plane_a.normal[0] * &plane_b.normal[1] - &plane_a.normal[1] * &plane_b.normal[0],
        ];
        let mags: Vec<Rat> = d.iter().map(Rat::abs).collect();
        let mut best = 0;
        for i in 1..3 {
            if mags[i] > mags[best] {
                best = i;
            }
        }
        best
    };
    let lambda = |p: &XPoint| p.0[axis].clone();

    let (lo_a, hi_a) = interval(&pts_a, &lambda);
    let (lo_b, hi_b) = interval(&pts_b, &lambda);

    let lo = if lambda(&pts_a[lo_a]) >= lambda(&pts_b[lo_b]) {
        &pts_a[lo_a]
    } else {
        &pts_b[lo_b]
    };
    let hi = if lambda(&pts_a[hi_a]) <= lambda(&pts_b[hi_b]) {
        &pts_a[hi_a]
    } else {
        &pts_b[hi_b]
    };

    match lambda(lo).cmp(&lambda(hi)) {
        std::cmp::Ordering::Greater => TriTriIntersection::None,
        std::cmp::Ordering::Equal => TriTriIntersection::Point(lo.clone()),
        std::cmp::Ordering::Less => TriTriIntersection::Segment(SegmentGeometry {
            endpoints: [make_endpoint(lo, a, b), make_endpoint(hi, a, b)],
        }),
    }
}

fn make_endpoint(p: &XPoint, a: [&XPoint; 3], b: [&XPoint; 3]) -> SegmentEndpoint {
    SegmentEndpoint {
        exact: p.clone(),
        rounded: p.to_point3(),
        on_a: classify_on_triangle(p, a),
        on_b: classify_on_triangle(p, b),
    }
}

/// Points where a triangle's boundary meets the other plane: vertices with
/// zero height plus proper edge crossings. One or two distinct points.
fn plane_crossings(t: [&XPoint; 3], h: &[Rat], s: &[i8]) -> Vec<XPoint> {
    let mut out: Vec<XPoint> = Vec::new();
    let mut push = |p: XPoint| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for i in 0..3 {
        if s[i] == 0 {
            push(t[i].clone());
        }
        let j = (i + 1) % 3;
        if s[i] * s[j] < 0 {
            // p = t_i + (t_j - t_i) * h_i / (h_i - h_j)
            let frac = &h[i] / (&h[i] - &h[j]);
            let coords = [
                &t[i].0[0] + (&t[j].0[0] - &t[i].0[0]) * &frac,
                &t[i].0[1] + (&t[j].0[1] - &t[i].0[1]) * &frac,
                &t[i].0[2] + (&t[j].0[2] - &t[i].0[2]) * &frac,
            ];
            push(XPoint(coords));
        }
    }
    debug_assert!(out.len() <= 2);
    out
}

fn interval<'p, F: Fn(&XPoint) -> Rat>(pts: &'p [XPoint], lambda: &F) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for i in 1..pts.len() {
        if lambda(&pts[i]) < lambda(&pts[lo]) {
            lo = i;
        }
        if lambda(&pts[i]) > lambda(&pts[hi]) {
            hi = i;
        }
    }
    (lo, hi)
}

fn coplanar_overlap(a: [&XPoint; 3], b: [&XPoint; 3], plane: &XPlane) -> TriTriIntersection {
    let axis = plane.dominant_axis();
    let project_ccw = |t: [&XPoint; 3]| -> [XPoint2; 3] {
        let p = [t[0].project(axis), t[1].project(axis), t[2].project(axis)];
        if orient2d(&p[0], &p[1], &p[2]) > 0 {
            p
        } else {
            [p[0].clone(), p[2].clone(), p[1].clone()]
        }
    };
    let pa = project_ccw(a);
    let pb = project_ccw(b);
    let overlap = dedupe_ring(&clip_convex(&pa, &pb));

    // Collapse zero-area results to their contact dimension.
    let lift = |p2: &XPoint2| plane.lift(p2, axis);
    match overlap.len() {
        0 => TriTriIntersection::None,
        1 => TriTriIntersection::Point(lift(&overlap[0])),
        _ => {
            if ring_area_doubled(&overlap).is_zero() {
                // Collinear ring: a segment between its extreme points.
                let mut lo = 0;
                let mut hi = 0;
                for i in 1..overlap.len() {
                    if overlap[i] < overlap[lo] {
                        lo = i;
                    }
                    if overlap[i] > overlap[hi] {
                        hi = i;
                    }
                }
                if lo == hi {
                    return TriTriIntersection::Point(lift(&overlap[lo]));
                }
                let e0 = lift(&overlap[lo]);
                let e1 = lift(&overlap[hi]);
                TriTriIntersection::Segment(SegmentGeometry {
                    endpoints: [make_endpoint(&e0, a, b), make_endpoint(&e1, a, b)],
                })
            } else {
                TriTriIntersection::CoplanarOverlap {
                    polygon: overlap.iter().map(|p| lift(p)).collect(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_from_f64;

    fn on_plane_of(p: &XPoint, t: [&XPoint; 3]) -> bool {
        XPlane::from_triangle(t[0], t[1], t[2])
            .map(|pl| pl.contains(p))
            .unwrap_or(false)
    }

    fn exact_eq_f64(p: &XPoint, q: &Point3) -> bool {
        p.0[0] == rat_from_f64(q.x) && p.0[1] == rat_from_f64(q.y) && p.0[2] == rat_from_f64(q.z)
    }

    fn pt(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn parallel_planes_do_not_intersect() {
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
            pt(0.0, 2.0, 0.0),
            pt(0.0, 0.0, 1.0),
            pt(2.0, 0.0, 1.0),
            pt(0.0, 2.0, 1.0),
        );
        assert!(matches!(r, TriTriIntersection::None));
    }

    #[test]
    fn canonical_crossing_yields_segment_on_both_planes() {
        // A spans the z=0 plane around the origin; B is vertical, cutting
        // through A's interior.
        let a = [
            XPoint::from_point3(&pt(-1.0, -1.0, 0.0)),
            XPoint::from_point3(&pt(1.0, -1.0, 0.0)),
            XPoint::from_point3(&pt(0.0, 1.0, 0.0)),
        ];
        let b = [
            XPoint::from_point3(&pt(0.0, 0.0, -1.0)),
            XPoint::from_point3(&pt(0.0, 0.0, 1.0)),
            XPoint::from_point3(&pt(0.0, -2.0, 1.0)),
        ];
        let r = tri_tri_intersect_exact([&a[0], &a[1], &a[2]], [&b[0], &b[1], &b[2]]);
        let TriTriIntersection::Segment(seg) = r else {
            panic!("expected a segment, got {r:?}");
        };
        for ep in &seg.endpoints {
            assert!(on_plane_of(&ep.exact, [&a[0], &a[1], &a[2]]));
            assert!(on_plane_of(&ep.exact, [&b[0], &b[1], &b[2]]));
            assert!(ep.exact.0[2].is_zero(), "endpoint must lie in z = 0");
        }
        assert_ne!(seg.endpoints[0].exact, seg.endpoints[1].exact);
    }

    #[test]
    fn swapping_triangles_is_symmetric() {
        let a = [
            XPoint::from_point3(&pt(-1.0, -1.0, 0.0)),
            XPoint::from_point3(&pt(1.5, -0.5, 0.0)),
            XPoint::from_point3(&pt(0.0, 1.0, 0.25)),
        ];
        let b = [
            XPoint::from_point3(&pt(0.1, 0.0, -1.0)),
            XPoint::from_point3(&pt(0.2, 0.1, 1.0)),
            XPoint::from_point3(&pt(1.0, -2.0, 1.0)),
        ];
        let r1 = tri_tri_intersect_exact([&a[0], &a[1], &a[2]], [&b[0], &b[1], &b[2]]);
        let r2 = tri_tri_intersect_exact([&b[0], &b[1], &b[2]], [&a[0], &a[1], &a[2]]);
        match (r1, r2) {
            (TriTriIntersection::Segment(s1), TriTriIntersection::Segment(s2)) => {
                let set1 = [s1.endpoints[0].exact.clone(), s1.endpoints[1].exact.clone()];
                let set2 = [s2.endpoints[0].exact.clone(), s2.endpoints[1].exact.clone()];
                assert!(set1 == set2 || set1 == [set2[1].clone(), set2[0].clone()]);
            }
            (r1, r2) => panic!("expected segments, got {r1:?} / {r2:?}"),
        }
    }

    #[test]
    fn identical_triangles_are_a_coplanar_overlap() {
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 1.0),
            pt(2.0, 0.0, 1.0),
            pt(0.0, 2.0, 1.0),
            pt(0.0, 0.0, 1.0),
            pt(2.0, 0.0, 1.0),
            pt(0.0, 2.0, 1.0),
        );
        let TriTriIntersection::CoplanarOverlap { polygon } = r else {
            panic!("expected coplanar overlap, got {r:?}");
        };
        assert_eq!(polygon.len(), 3);
    }

    #[test]
    fn coplanar_partial_overlap_polygon() {
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
            pt(0.0, 2.0, 0.0),
            pt(1.0, -1.0, 0.0),
            pt(3.0, 1.0, 0.0),
            pt(-1.0, 1.0, 0.0),
        );
        let TriTriIntersection::CoplanarOverlap { polygon } = r else {
            panic!("expected coplanar overlap, got {r:?}");
        };
        assert!(polygon.len() >= 3 && polygon.len() <= 6);
    }

    #[test]
    fn coplanar_touching_edge_is_a_segment() {
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
            pt(0.0, 2.0, 0.0),
            pt(0.0, 0.0, 0.0),
            pt(-2.0, 0.0, 0.0),
            pt(0.0, 2.0, 0.0),
        );
        assert!(matches!(r, TriTriIntersection::Segment(_)), "got {r:?}");
    }

    #[test]
    fn vertex_touch_is_a_point() {
        // B touches A's interior at a single vertex.
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(4.0, 0.0, 0.0),
            pt(0.0, 4.0, 0.0),
            pt(1.0, 1.0, 0.0),
            pt(1.0, 1.0, 2.0),
            pt(3.0, 1.0, 2.0),
        );
        let TriTriIntersection::Point(p) = r else {
            panic!("expected point contact, got {r:?}");
        };
        assert!(exact_eq_f64(&p, &pt(1.0, 1.0, 0.0)));
    }

    #[test]
    fn shared_edge_is_that_segment() {
        // Two faces of a closed surface sharing an edge.
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(1.0, 0.0, 0.0),
            pt(0.0, 0.0, 1.0),
            pt(1.0, 0.0, 0.0),
            pt(0.0, 0.0, 0.0),
            pt(0.0, 1.0, 0.0),
        );
        let TriTriIntersection::Segment(seg) = r else {
            panic!("expected segment, got {r:?}");
        };
        for ep in &seg.endpoints {
            assert!(matches!(ep.on_a, ContactFeature::Vertex(_)));
            assert!(matches!(ep.on_b, ContactFeature::Vertex(_)));
        }
    }

    #[test]
    fn degenerate_input_is_flagged() {
        let r = tri_tri_intersect(
            pt(0.0, 0.0, 0.0),
            pt(1.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
            pt(0.0, 0.0, 1.0),
            pt(1.0, 0.0, 1.0),
            pt(0.0, 1.0, 1.0),
        );
        assert!(matches!(r, TriTriIntersection::DegenerateInput));
    }

    #[test]
    fn endpoint_classification() {
        // B's edge pierces A's interior; one endpoint interior to A, both on
        // B's features.
        let r = tri_tri_intersect(
            pt(-2.0, -2.0, 0.0),
            pt(2.0, -2.0, 0.0),
            pt(0.0, 2.0, 0.0),
            pt(0.0, 0.0, -1.0),
            pt(0.0, 0.0, 1.0),
            pt(0.0, -3.0, 1.0),
        );
        let TriTriIntersection::Segment(seg) = r else {
            panic!("expected segment, got {r:?}");
        };
        // One endpoint is where B's (b0,b1) edge crosses z=0 at the origin:
        // interior of A, on an edge of B.
        let origin = seg
            .endpoints
            .iter()
            .find(|ep| exact_eq_f64(&ep.exact, &pt(0.0, 0.0, 0.0)))
            .expect("origin endpoint");
        assert_eq!(origin.on_a, ContactFeature::Interior);
        assert!(matches!(origin.on_b, ContactFeature::Edge(_)));
    }
}
