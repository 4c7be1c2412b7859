//! Compare naive per-point winding evaluation against the batch kernel.
//!
//! Usage: `cargo run --release --example bench_batch [points] [threads]`

use std::time::Instant;

use windmesh::mesh::Point3;
use windmesh::shapes;
use windmesh::winding::{build_bvh, winding_number, winding_number_batch};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let threads: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let mesh = shapes::icosphere(1.0, 5);
    let bvh = build_bvh(&mesh).unwrap();
    println!("mesh: {} faces, {} query points", mesh.face_count(), count);

    let mut state = 0x12345u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
    };
    let points: Vec<Point3> = (0..count)
        .map(|_| Point3::new(next(), next(), next()))
        .collect();

    let t0 = Instant::now();
    let mut naive_sum = 0.0;
    for p in &points {
        naive_sum += winding_number(&mesh, *p).unwrap().value;
    }
    let naive = t0.elapsed();

    let t1 = Instant::now();
    let batch = winding_number_batch(&mesh, &bvh, &points, threads);
    let batched = t1.elapsed();
    let batch_sum: f64 = batch.iter().map(|r| r.as_ref().unwrap().value).sum();

    let mut max_diff = 0.0f64;
    for (p, r) in points.iter().take(500).zip(&batch) {
        let a = winding_number(&mesh, *p).unwrap().value;
        max_diff = max_diff.max((a - r.as_ref().unwrap().value).abs());
    }

    println!(
        "naive:  {:?} ({:.1} ns per face-point)",
        naive,
        naive.as_nanos() as f64 / (count as f64 * mesh.face_count() as f64)
    );
    println!(
        "batch:  {:?} with {} workers, speedup {:.2}x",
        batched,
        threads,
        naive.as_secs_f64() / batched.as_secs_f64()
    );
    println!("sums: naive {naive_sum:.6}, batch {batch_sum:.6}, max pointwise diff (500 spot checks) {max_diff:.3e}");
}
