//! Booleans on general-position inputs: rotated boxes, sphere pairs,
//! self-overlapping and inside-out operands. Without analytic volumes the
//! checks are the set-algebra identities, closedness, and the refinement
//! audit.

mod common;

use windmesh::boolean::{mesh_boolean, BoolOp, BoolOpSpec, InsideRule};
use windmesh::corefine::{audit_refinement, corefine};
use windmesh::mesh::{Point3, TriMesh, Vec3};
use windmesh::shapes;

fn rotated(mesh: &TriMesh, yaw: f64, pitch: f64) -> TriMesh {
    let (cy, sy) = (yaw.cos(), yaw.sin());
    let (cp, sp) = (pitch.cos(), pitch.sin());
    mesh.map_vertices(|p| {
        let (x, y, z) = (p.x, p.y, p.z);
        let (x1, y1) = (cy * x - sy * y, sy * x + cy * y);
        let (y2, z2) = (cp * y1 - sp * z, sp * y1 + cp * z);
        Point3::new(x1, y2, z2)
    })
}

fn check_identities(name: &str, a: &TriMesh, b: &TriMesh) {
    let pair = corefine(a, b);
    let audit = audit_refinement(a, b, &pair);
    assert!(
        audit.is_clean(),
        "{name}: refinement audit failed: {:?}",
        audit.residual_violations
    );

    // One co-refinement serves all five operations.
    let field_a = windmesh::winding::WindingField::new(&pair.refined_a, 0);
    let field_b = windmesh::winding::WindingField::new(&pair.refined_b, 0);
    let vol = |op: BoolOp| -> f64 {
        let spec = BoolOpSpec::new(op);
        let classified =
            windmesh::boolean::classify(&pair, spec, &field_a, &field_b).unwrap();
        let duplicates = windmesh::boolean::resolve_coplanar(&pair.coplanar_pairs, spec);
        let mesh = windmesh::boolean::assemble(&classified, &duplicates, &pair);
        let audit = mesh.audit();
        assert!(
            audit.is_closed,
            "{name}/{op:?}: output not closed ({} boundary edges)",
            audit.boundary_edge_count
        );
        mesh.signed_volume()
    };

    let va = a.signed_volume();
    let vb = b.signed_volume();
    let union = vol(BoolOp::Union);
    let inter = vol(BoolOp::Intersection);
    let minus = vol(BoolOp::DifferenceAB);
    let rminus = vol(BoolOp::DifferenceBA);
    let xor = vol(BoolOp::SymmetricDifference);

    let tol = 1e-9 * va.abs().max(vb.abs()).max(1.0);
    assert!((union + inter - va - vb).abs() < tol, "{name}: complementarity");
    assert!((minus + inter - va).abs() < tol, "{name}: difference identity");
    assert!((rminus + inter - vb).abs() < tol, "{name}: reverse difference identity");
    assert!((xor - minus - rminus).abs() < tol, "{name}: xor identity");
    assert!(inter >= -tol && union <= va + vb + tol, "{name}: bounds");
}

#[test]
fn rotated_boxes() {
    let a = shapes::unit_cube();
    let b = rotated(&shapes::unit_cube(), 0.43, 0.37).translated(Vec3::new(0.4, 0.2, 0.3));
    check_identities("rotated-box", &a, &b);

    // Rotation through a vertex-heavy configuration.
    let c = rotated(&shapes::cube_centered(Point3::new(0.5, 0.5, 0.5), 0.5), 0.785398, 0.0);
    check_identities("diamond-box", &a, &c);
}

#[test]
fn sphere_pairs() {
    let a = shapes::icosphere(1.0, 2);
    let b = shapes::icosphere(0.9, 1).translated(Vec3::new(0.8, 0.3, 0.1));
    check_identities("sphere-pair", &a, &b);
}

#[test]
fn sphere_against_box() {
    let a = shapes::icosphere(0.9, 2);
    let b = shapes::box_mesh(Point3::new(0.0, -1.5, -1.5), Point3::new(1.5, 1.5, 1.5));
    check_identities("sphere-box", &a, &b);
}

#[test]
fn self_overlapping_operand_keeps_multiplicity() {
    // A is one mesh containing two overlapping cubes: its winding reaches 2
    // in the shared region. Self-intersections are never refined; carving B
    // out of the singly-wound part leaves a closed output whose winding
    // preserves A's multiplicities.
    let a = shapes::unit_cube().concat(&shapes::box_mesh(
        Point3::new(0.5, 0.0, 0.0),
        Point3::new(1.5, 1.0, 1.0),
    ));
    let b = shapes::box_mesh(Point3::new(0.2, 0.25, 0.25), Point3::new(0.45, 0.75, 0.75));
    let out = mesh_boolean(&a, &b, BoolOpSpec::new(BoolOp::DifferenceAB), 0).unwrap();
    assert!(out.mesh.audit().is_closed);

    let w = |x: f64, y: f64, z: f64| {
        windmesh::winding::winding_number(&out.mesh, Point3::new(x, y, z))
            .unwrap()
            .value
    };
    assert!(w(0.3, 0.5, 0.5).abs() < 1e-9, "carved region");
    assert!((w(0.1, 0.1, 0.1) - 1.0).abs() < 1e-9, "first cube only");
    assert!((w(1.2, 0.5, 0.5) - 1.0).abs() < 1e-9, "second cube only");
    assert!((w(0.75, 0.5, 0.5) - 2.0).abs() < 1e-9, "doubly-wound overlap");
}

#[test]
fn self_overlapping_operand_crossing_inner_wall_completes() {
    // When B crosses a face interior to A's doubly-wound region, the
    // classification table discards that wall's inside-B parts; the result
    // is no longer watertight (A is not embedded, so closedness is only
    // promised for embedded inputs) but the pipeline completes cleanly and
    // the far field still classifies correctly.
    let a = shapes::unit_cube().concat(&shapes::box_mesh(
        Point3::new(0.5, 0.0, 0.0),
        Point3::new(1.5, 1.0, 1.0),
    ));
    let b = shapes::box_mesh(Point3::new(0.25, 0.25, 0.25), Point3::new(0.6, 0.75, 0.75));
    let out = mesh_boolean(&a, &b, BoolOpSpec::new(BoolOp::DifferenceAB), 0).unwrap();
    let w = |x: f64, y: f64, z: f64| {
        windmesh::winding::winding_number(&out.mesh, Point3::new(x, y, z))
            .unwrap()
            .value
    };
    // The output is open, so its winding field is smooth rather than
    // integral; far from the hole it still lands near the right integers.
    assert!((w(1.3, 0.5, 0.5) - 1.0).abs() < 0.05, "far inside second cube");
    assert!(w(3.0, 3.0, 3.0).abs() < 0.05, "outside everything");
}

#[test]
fn inside_out_operand_follows_the_action_table() {
    // B is an inside-out nested cube (winding -1 in its pocket). The action
    // table keeps-and-flips B's faces inside A, so `minus` under the default
    // rule yields A plus a doubly-wound pocket: the w > 1/2 region is still
    // exactly A, the multiplicity just rises to 2 inside the pocket.
    let a = shapes::unit_cube();
    let b_inward = shapes::box_mesh(Point3::new(0.25, 0.25, 0.25), Point3::new(0.75, 0.75, 0.75))
        .flip_all();
    let out = mesh_boolean(&a, &b_inward, BoolOpSpec::new(BoolOp::DifferenceAB), 0).unwrap();
    assert!(out.mesh.audit().is_closed);
    let w = |x: f64, y: f64, z: f64| {
        windmesh::winding::winding_number(&out.mesh, Point3::new(x, y, z))
            .unwrap()
            .value
    };
    assert!((w(0.5, 0.5, 0.5) - 2.0).abs() < 1e-9, "pocket doubles");
    assert!((w(0.1, 0.5, 0.5) - 1.0).abs() < 1e-9, "shell still single");
    assert!(w(2.0, 0.5, 0.5).abs() < 1e-9, "outside");

    // Intersection under the abs rule: A's faces see |w_B| = 0 and drop out,
    // B's faces see |w_A| = 1 and stay, so the output is the inside-out
    // pocket itself — whose |w| > 1/2 region is exactly the intersection.
    let inter = mesh_boolean(
        &a,
        &b_inward,
        BoolOpSpec::with_rule(BoolOp::Intersection, InsideRule::AbsWindingGtHalf),
        0,
    )
    .unwrap();
    assert!((inter.mesh.signed_volume() + 0.125).abs() < 1e-9, "inward pocket volume");
    let w_pocket = windmesh::winding::winding_number(&inter.mesh, Point3::new(0.5, 0.5, 0.5))
        .unwrap()
        .value;
    assert!((w_pocket + 1.0).abs() < 1e-9);
}
