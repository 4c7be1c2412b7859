//! Property tests for the winding-number evaluator and the mesh parsers.

mod common;

use common::distance_to_mesh;
use proptest::prelude::*;

use windmesh::io::{read_obj, read_stl};
use windmesh::mesh::{Point3, TriMesh, Triangle, Vec3};
use windmesh::shapes;
use windmesh::winding::{winding_number, winding_number_batch, WindingBvh};

fn arb_point() -> impl Strategy<Value = Point3> {
    (-4.0f64..4.0, -4.0f64..4.0, -4.0f64..4.0).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

/// Random open triangle soup: anywhere from 1 to 24 faces in a 2^3 box.
fn arb_soup() -> impl Strategy<Value = TriMesh> {
    proptest::collection::vec((arb_point(), arb_point(), arb_point()), 1..24).prop_map(|tris| {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (a, b, c) in tris {
            let base = vertices.len() as u32;
            vertices.extend([a, b, c]);
            faces.push(Triangle::new(base, base + 1, base + 2));
        }
        TriMesh::new(vertices, faces).unwrap()
    })
}

/// Unit quaternion -> rotation, applied in f64.
fn rotate(p: Point3, q: [f64; 4]) -> Point3 {
    let [w, x, y, z] = q;
    let (px, py, pz) = (p.x, p.y, p.z);
    // p' = p + 2 q_v x (q_v x p + w p)
    let (cx, cy, cz) = (
        y * pz - z * py + w * px,
        z * px - x * pz + w * py,
        x * py - y * px + w * pz,
    );
    Point3::new(
        px + 2.0 * (y * cz - z * cy),
        py + 2.0 * (z * cx - x * cz),
        pz + 2.0 * (x * cy - y * cx),
    )
}

fn arb_rotation() -> impl Strategy<Value = [f64; 4]> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter_map("non-null quaternion", |(w, x, y, z)| {
            let n = (w * w + x * x + y * y + z * z).sqrt();
            if n < 1e-3 {
                None
            } else {
                Some([w / n, x / n, y / n, z / n])
            }
        })
}

fn eval(mesh: &TriMesh, p: Point3) -> Option<f64> {
    winding_number(mesh, p).ok().map(|w| w.value)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry_under_orientation_flip(mesh in arb_soup(), p in arb_point()) {
        let flipped = mesh.flip_all();
        if let (Some(w), Some(wf)) = (eval(&mesh, p), eval(&flipped, p)) {
            prop_assert!((w + wf).abs() < 1e-12, "w={w} flipped={wf}");
        }
    }

    #[test]
    fn additivity_of_concatenation(m1 in arb_soup(), m2 in arb_soup(), p in arb_point()) {
        let both = m1.concat(&m2);
        if let (Some(w1), Some(w2), Some(w)) = (eval(&m1, p), eval(&m2, p), eval(&both, p)) {
            prop_assert!((w - (w1 + w2)).abs() < 1e-12, "w={w} parts={}", w1 + w2);
        }
    }

    #[test]
    fn rigid_equivariance(mesh in arb_soup(), p in arb_point(), q in arb_rotation(),
                          t in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)) {
        let shift = Vec3::new(t.0, t.1, t.2);
        let moved = mesh.map_vertices(|v| rotate(v, q) + shift);
        let p_moved = rotate(p, q) + shift;
        if let (Some(w), Some(wm)) = (eval(&mesh, p), eval(&moved, p_moved)) {
            prop_assert!((w - wm).abs() < 1e-10, "w={w} moved={wm}");
        }
    }

    #[test]
    fn batch_agrees_with_sequential(mesh in arb_soup(),
                                    pts in proptest::collection::vec(arb_point(), 1..40),
                                    threads in 1usize..5) {
        let bvh = WindingBvh::build(&mesh).unwrap();
        let batch = winding_number_batch(&mesh, &bvh, &pts, threads);
        for (p, r) in pts.iter().zip(batch) {
            match (winding_number(&mesh, *p), r) {
                (Ok(a), Ok(b)) => prop_assert!((a.value - b.value).abs() < 1e-10),
                (Err(ea), Err(eb)) => prop_assert_eq!(ea, eb),
                (a, b) => prop_assert!(false, "divergent results {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn obj_parser_never_panics(data in "(?s).{0,300}") {
        let _ = read_obj(std::io::Cursor::new(data.as_bytes()));
    }

    #[test]
    fn obj_parser_never_panics_on_tokens(
        lines in proptest::collection::vec(
            prop_oneof![
                Just("v".to_string()),
                (any::<f64>(), any::<f64>(), any::<f64>()).prop_map(|(a, b, c)| format!("v {a} {b} {c}")),
                (any::<i32>(), any::<i32>(), any::<i32>()).prop_map(|(a, b, c)| format!("f {a} {b} {c}")),
                (any::<u16>(), any::<u16>()).prop_map(|(a, b)| format!("f {a} {b}")),
                Just("f 1 2 3 4 5".to_string()),
                Just("# comment".to_string()),
                Just("vn 0 0 1".to_string()),
            ],
            0..24,
        )
    ) {
        let text = lines.join("\n");
        let _ = read_obj(std::io::Cursor::new(text.as_bytes()));
    }

    #[test]
    fn stl_parser_never_panics(data in proptest::collection::vec(any::<u8>(), 0..400)) {
        let _ = read_stl(std::io::Cursor::new(&data));
    }
}

#[test]
fn closed_meshes_have_integer_winding() {
    // Deterministic xorshift for sample points.
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };

    let meshes: Vec<(TriMesh, Box<dyn Fn(Point3) -> i32>)> = vec![
        (
            shapes::cube_centered(Point3::new(0.0, 0.0, 0.0), 1.0),
            Box::new(|p: Point3| {
                (p.x.abs() < 1.0 && p.y.abs() < 1.0 && p.z.abs() < 1.0) as i32
            }),
        ),
        (
            shapes::icosphere(1.5, 2),
            Box::new(|p: Point3| ((p.x * p.x + p.y * p.y + p.z * p.z).sqrt() < 1.5) as i32),
        ),
        (
            shapes::icosphere(1.0, 1).concat(&shapes::icosphere(2.0, 2)),
            Box::new(|p: Point3| {
                let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
                (r < 1.0) as i32 + (r < 2.0) as i32
            }),
        ),
        (
            shapes::cube_centered(Point3::new(0.0, 0.0, 0.0), 1.0).flip_all(),
            Box::new(|p: Point3| {
                -((p.x.abs() < 1.0 && p.y.abs() < 1.0 && p.z.abs() < 1.0) as i32)
            }),
        ),
    ];

    for (mesh, expected) in &meshes {
        let mut checked = 0;
        while checked < 200 {
            let p = Point3::new(next() * 6.0 - 3.0, next() * 6.0 - 3.0, next() * 6.0 - 3.0);
            // Stay clearly off the surface so the expected integer is
            // unambiguous.
            if distance_to_mesh(mesh, p) < 1e-2 {
                continue;
            }
            let w = winding_number(mesh, p).unwrap().value;
            let want = expected(p) as f64;
            assert!(
                (w - want).abs() < 1e-9,
                "w={w} expected={want} at {p:?}"
            );
            checked += 1;
        }
    }
}

