//! Generalized winding numbers.
//!
//! The winding number of an oriented triangle mesh at a query point is the
//! sum of the signed solid angles its faces subtend there, divided by 4π.
//! For a closed, embedded, outward-oriented mesh it is exactly 1 inside and
//! 0 outside; for open or self-overlapping meshes it varies smoothly and
//! measures "how much inside" the point is.
//!
//! Evaluation here is exact up to floating-point rounding: the BVH in
//! [`bvh`] only reorders the summation and partitions work across threads,
//! it never approximates.

mod bvh;

pub use bvh::{Aabb, BvhNode, BvhNodeKind, EmptyMesh, WindingBvh};

use std::f64::consts::PI;

use thiserror::Error;

use crate::kahan::CompensatedSum;
use crate::mesh::{Point3, TriMesh};

/// The real-valued winding number at one query point, in units of full
/// windings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingValue {
    pub value: f64,
}

/// The query point lies exactly on a face; the winding number is undefined
/// there.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("query point lies exactly on face {face}")]
pub struct OnSurface {
    /// Lowest-indexed face the point was found on.
    pub face: usize,
}

/// Marker returned by [`solid_angle`] when the viewpoint touches the
/// triangle.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("viewpoint lies on the triangle")]
pub struct OnTriangle;

/// Per-point result of a winding evaluation.
pub type WindingResult = Result<WindingValue, OnSurface>;

/// Signed solid angle (steradians) subtended by triangle (a, b, c) seen from
/// `p`, via the arctangent form:
///
/// `Ω = 2 atan2(det[A,B,C], |A||B||C| + (A·B)|C| + (B·C)|A| + (C·A)|B|)`
///
/// with A = a-p, B = b-p, C = c-p. Positive when the triangle winds
/// counter-clockwise as seen from `p`, so that a closed outward-oriented
/// surface enclosing `p` sums to +4π.
///
/// Returns [`OnTriangle`] when `p` coincides with a corner or the evaluated
/// determinant and denominator vanish together (p on the triangle itself);
/// detection is exact on the evaluated expressions, not a tolerance.
#[inline]
pub fn solid_angle(p: Point3, a: Point3, b: Point3, c: Point3) -> Result<f64, OnTriangle> {
    solid_angle_coords(
        p.x, p.y, p.z,
        [a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z],
    )
}

#[inline(always)]
fn solid_angle_coords(px: f64, py: f64, pz: f64, t: [f64; 9]) -> Result<f64, OnTriangle> {
    let ax = t[0] - px;
    let ay = t[1] - py;
    let az = t[2] - pz;
    let bx = t[3] - px;
    let by = t[4] - py;
    let bz = t[5] - pz;
    let cx = t[6] - px;
    let cy = t[7] - py;
    let cz = t[8] - pz;

    let la = (ax * ax + ay * ay + az * az).sqrt();
    let lb = (bx * bx + by * by + bz * bz).sqrt();
    let lc = (cx * cx + cy * cy + cz * cz).sqrt();
    if la == 0.0 || lb == 0.0 || lc == 0.0 {
        return Err(OnTriangle);
    }

    let det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx);
    let ab = ax * bx + ay * by + az * bz;
    let bc = bx * cx + by * cy + bz * cz;
    let ca = cx * ax + cy * ay + cz * az;
    let denom = la * lb * lc + ab * lc + bc * la + ca * lb;

    if det == 0.0 && denom <= 0.0 {
        // Interior (denom < 0) or boundary (denom == 0) of the triangle.
        return Err(OnTriangle);
    }
    Ok(2.0 * det.atan2(denom))
}

#[inline]
fn finish(acc: CompensatedSum) -> WindingValue {
    WindingValue {
        value: acc.total() / (4.0 * PI),
    }
}

/// Winding number of `mesh` at `p`: compensated sum of per-face solid angles
/// over 4π. Deterministic for a fixed mesh and point.
pub fn winding_number(mesh: &TriMesh, p: Point3) -> WindingResult {
    let mut acc = CompensatedSum::new();
    for face in 0..mesh.face_count() {
        let [a, b, c] = mesh.face_points(face);
        match solid_angle(p, a, b, c) {
            Ok(omega) => acc.add(omega),
            Err(OnTriangle) => return Err(OnSurface { face }),
        }
    }
    Ok(finish(acc))
}

/// Same sum with a plain (uncompensated) `f64` accumulator. Diagnostic
/// counterpart of [`winding_number`] for quantifying round-off.
pub fn winding_number_uncompensated(mesh: &TriMesh, p: Point3) -> WindingResult {
    let mut sum = 0.0f64;
    for face in 0..mesh.face_count() {
        let [a, b, c] = mesh.face_points(face);
        match solid_angle(p, a, b, c) {
            Ok(omega) => sum += omega,
            Err(OnTriangle) => return Err(OnSurface { face }),
        }
    }
    Ok(WindingValue {
        value: sum / (4.0 * PI),
    })
}

/// Build the face BVH used for batch evaluation and broad-phase queries.
pub fn build_bvh(mesh: &TriMesh) -> Result<WindingBvh, EmptyMesh> {
    WindingBvh::build(mesh)
}

/// Sign class of a complex argument, distinguishing the branch exactly the
/// way `atan2` does (including signed zero on the negative real axis).
#[derive(Clone, Copy, PartialEq, Eq)]
enum ArgSign {
    Neg,
    Zero,
    Pos,
}

#[inline(always)]
fn arg_sign(re: f64, im: f64) -> ArgSign {
    if im > 0.0 {
        ArgSign::Pos
    } else if im < 0.0 {
        ArgSign::Neg
    } else if re >= 0.0 {
        ArgSign::Zero // arg = +/-0
    } else if im.is_sign_negative() {
        ArgSign::Neg // atan2(-0.0, re<0) = -pi
    } else {
        ArgSign::Pos // atan2(+0.0, re<0) = +pi
    }
}

/// Points evaluated per face-stream pass. Lane arithmetic is fully
/// independent, so grouping points changes nothing about any point's value;
/// it only amortizes face loads and exposes SIMD-friendly structure.
const LANES: usize = 4;

/// Faces accumulated into the complex product between `atan2` spills.
const BLOCK: usize = 16;

/// Batch kernel: the same per-face (det, denom) values as [`solid_angle`],
/// but summed via a running complex product — the sum of `atan2(d_i, n_i)`
/// is the argument of `prod (n_i + i d_i)` once branch-cut wraps are counted,
/// so one `atan2` serves a whole block of faces. This is an algebraic
/// identity, not an approximation; it agrees with the sequential evaluator
/// to machine-precision accumulation differences.
///
/// Processes up to [`LANES`] points per pass. On-surface lanes are poisoned
/// (their arithmetic keeps running on garbage, which is discarded) and report
/// the lowest-indexed on-surface face, matching `winding_number`.
fn eval_group(
    tris: &[[u32; 3]],
    verts: &[[f64; 3]],
    order: &[u32],
    ps: &[Point3],
    out: &mut [WindingResult],
) {
    debug_assert!(ps.len() == out.len() && ps.len() <= LANES);
    let lanes = ps.len();
    let mut px = [0.0f64; LANES];
    let mut py = [0.0f64; LANES];
    let mut pz = [0.0f64; LANES];
    for (l, p) in ps.iter().enumerate() {
        px[l] = p.x;
        py[l] = p.y;
        pz[l] = p.z;
    }
    // Pad unused lanes with the first point; their results are discarded.
    for l in lanes..LANES {
        px[l] = px[0];
        py[l] = py[0];
        pz[l] = pz[0];
    }

    let mut acc = [CompensatedSum::new(); LANES];
    let mut re = [1.0f64; LANES];
    let mut im = [0.0f64; LANES];
    let mut wraps = [0i64; LANES];
    let mut surface: [Option<usize>; LANES] = [None; LANES];
    let mut in_block = 0usize;

    for (slot, idx) in tris.iter().enumerate() {
        let a = verts[idx[0] as usize];
        let b = verts[idx[1] as usize];
        let c = verts[idx[2] as usize];

        let mut det = [0.0f64; LANES];
        let mut denom = [0.0f64; LANES];
        let mut degenerate = [false; LANES];
        for l in 0..LANES {
            let ax = a[0] - px[l];
            let ay = a[1] - py[l];
            let az = a[2] - pz[l];
            let bx = b[0] - px[l];
            let by = b[1] - py[l];
            let bz = b[2] - pz[l];
            let cx = c[0] - px[l];
            let cy = c[1] - py[l];
            let cz = c[2] - pz[l];

            let la = (ax * ax + ay * ay + az * az).sqrt();
            let lb = (bx * bx + by * by + bz * bz).sqrt();
            let lc = (cx * cx + cy * cy + cz * cz).sqrt();

            det[l] =
                ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx);
            let ab = ax * bx + ay * by + az * bz;
            let bc = bx * cx + by * cy + bz * cz;
            let ca = cx * ax + cy * ay + cz * az;
            denom[l] = la * lb * lc + ab * lc + bc * la + ca * lb;
            degenerate[l] = la == 0.0 || lb == 0.0 || lc == 0.0;
        }

        for l in 0..LANES {
            if degenerate[l] || (det[l] == 0.0 && denom[l] <= 0.0) {
                let face = order[slot] as usize;
                surface[l] = Some(surface[l].map_or(face, |cur| cur.min(face)));
            }
        }

        // Lane-wise complex accumulation; poisoned lanes compute garbage that
        // is never read.
        for l in 0..LANES {
            let zs = arg_sign(re[l], im[l]);
            let d = det[l];
            let n = denom[l];
            let ts = if d > 0.0 {
                ArgSign::Pos
            } else if d < 0.0 {
                ArgSign::Neg
            } else {
                ArgSign::Zero
            };
            let new_re = re[l] * n - im[l] * d;
            let new_im = re[l] * d + im[l] * n;
            // Renormalize by a power of two (exact, divider-free): the
            // argument is untouched and the magnitude stays near one.
            let e = ((new_re.abs() + new_im.abs()).to_bits() >> 52) & 0x7FF;
            let scale = if (1..=2045).contains(&e) {
                f64::from_bits((2046 - e) << 52)
            } else {
                1.0 / (new_re.abs() + new_im.abs())
            };
            re[l] = new_re * scale;
            im[l] = new_im * scale;
            let ns = arg_sign(re[l], im[l]);
            if zs == ArgSign::Pos && ts == ArgSign::Pos && ns != ArgSign::Pos {
                wraps[l] += 1;
            } else if zs == ArgSign::Neg && ts == ArgSign::Neg && ns != ArgSign::Neg {
                wraps[l] -= 1;
            }
        }

        in_block += 1;
        if in_block == BLOCK {
            for l in 0..LANES {
                acc[l].add(2.0 * (im[l].atan2(re[l]) + std::f64::consts::TAU * wraps[l] as f64));
                re[l] = 1.0;
                im[l] = 0.0;
                wraps[l] = 0;
            }
            in_block = 0;
        }
    }
    if in_block > 0 {
        for l in 0..LANES {
            acc[l].add(2.0 * (im[l].atan2(re[l]) + std::f64::consts::TAU * wraps[l] as f64));
        }
    }

    for l in 0..lanes {
        out[l] = match surface[l] {
            Some(face) => Err(OnSurface { face }),
            None => Ok(finish(acc[l])),
        };
    }
}

fn eval_chunk(
    tris: &[[u32; 3]],
    verts: &[[f64; 3]],
    order: &[u32],
    points: &[Point3],
) -> Vec<WindingResult> {
    let mut out = vec![Ok(WindingValue { value: 0.0 }); points.len()];
    for (ps, os) in points.chunks(LANES).zip(out.chunks_mut(LANES)) {
        eval_group(tris, verts, order, ps, os);
    }
    out
}

fn eval_point(tris: &[[u32; 3]], verts: &[[f64; 3]], order: &[u32], p: Point3) -> WindingResult {
    let mut out = [Ok(WindingValue { value: 0.0 })];
    eval_group(tris, verts, order, &[p], &mut out);
    out[0]
}

/// Batch winding evaluation over `points`.
///
/// Values agree with [`winding_number`] to within summation reordering
/// (< 1e-10 absolute in practice) and are bitwise independent of `threads`:
/// the BVH fixes the per-point summation order and threads only partition
/// the point list. Output order matches input order.
///
/// `threads == 0` selects the available parallelism; `threads == 1` runs
/// sequentially.
pub fn winding_number_batch(
    mesh: &TriMesh,
    bvh: &WindingBvh,
    points: &[Point3],
    threads: usize,
) -> Vec<WindingResult> {
    assert_eq!(
        bvh.face_count(),
        mesh.face_count(),
        "BVH was built for a different mesh"
    );
    let tris = bvh.tri_indices();
    let verts = bvh.verts();
    let order = bvh.face_order();

    let threads = effective_threads(threads, points.len());
    if threads <= 1 {
        return eval_chunk(tris, verts, order, points);
    }

    // Chunks are multiples of the lane width so grouping (which never affects
    // values) is also stable for bit-for-bit reproducibility.
    let chunk = points.len().div_ceil(threads).next_multiple_of(LANES);
    let mut out: Vec<WindingResult> = Vec::with_capacity(points.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|slice| scope.spawn(move || eval_chunk(tris, verts, order, slice)))
            .collect();
        for h in handles {
            out.extend(h.join().expect("winding worker panicked"));
        }
    });
    out
}

pub(crate) fn effective_threads(requested: usize, work_items: usize) -> usize {
    let t = if requested == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        requested
    };
    t.max(1).min(work_items.max(1))
}

/// A mesh paired with its BVH and a thread budget: the batch evaluator handed
/// to face classification. Handles the empty mesh (winding identically zero).
pub struct WindingField<'m> {
    mesh: &'m TriMesh,
    bvh: Option<WindingBvh>,
    threads: usize,
}

impl<'m> WindingField<'m> {
    pub fn new(mesh: &'m TriMesh, threads: usize) -> Self {
        let bvh = if mesh.is_empty() {
            None
        } else {
            Some(WindingBvh::build(mesh).expect("non-empty mesh"))
        };
        WindingField { mesh, bvh, threads }
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    pub fn eval(&self, p: Point3) -> WindingResult {
        match &self.bvh {
            Some(bvh) => eval_point(bvh.tri_indices(), bvh.verts(), bvh.face_order(), p),
            None => Ok(WindingValue { value: 0.0 }),
        }
    }

    pub fn eval_batch(&self, points: &[Point3]) -> Vec<WindingResult> {
        match &self.bvh {
            Some(bvh) => winding_number_batch(self.mesh, bvh, points, self.threads),
            None => points.iter().map(|_| Ok(WindingValue { value: 0.0 })).collect(),
        }
    }
}
