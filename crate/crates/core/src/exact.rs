//! Exact rational geometry.
//!
//! Every `f64` is an exact rational, so converting input coordinates to
//! [`Rat`] loses nothing. All intersection predicates and constructions in
//! the co-refinement stage run on these rationals; doubles reappear only in
//! the final, correctly-rounded presentation step ([`rat_to_f64`]).

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::mesh::Point3;

pub type Rat = BigRational;

/// Exact 3D point. Ordered lexicographically, which makes it usable as a
/// deterministic map key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XPoint(pub [Rat; 3]);

/// Exact 2D point (a projection of an [`XPoint`]).
pub type XPoint2 = [Rat; 2];

impl XPoint {
    pub fn from_point3(p: &Point3) -> XPoint {
        XPoint([rat_from_f64(p.x), rat_from_f64(p.y), rat_from_f64(p.z)])
    }

    /// Round each coordinate to the nearest `f64` (ties to even).
    pub fn to_point3(&self) -> Point3 {
        Point3::new(
            rat_to_f64(&self.0[0]),
            rat_to_f64(&self.0[1]),
            rat_to_f64(&self.0[2]),
        )
    }

    /// Drop `axis`, keeping the other two coordinates in cyclic order.
    pub fn project(&self, axis: usize) -> XPoint2 {
        [
            self.0[(axis + 1) % 3].clone(),
            self.0[(axis + 2) % 3].clone(),
        ]
    }
}

/// Exact conversion; panics on non-finite input (meshes are validated before
/// they get here).
pub fn rat_from_f64(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite coordinate")
}

/// Correctly rounded rational-to-double conversion (round to nearest, ties to
/// even). `BigRational::to_f64` is not guaranteed to round correctly for
/// ratios of huge integers, and welding depends on this being a pure function
/// of the exact value.
pub fn rat_to_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let a = r.numer().abs().into_parts().1; // |numerator| as BigUint
    let b = r.denom().abs().into_parts().1;

    // Exponent e with a/b in [2^e, 2^(e+1)).
    let mut e = a.bits() as i64 - b.bits() as i64;
    let ge = if e >= 0 {
        a >= (&b << e as usize)
    } else {
        (&a << (-e) as usize) >= b
    };
    if !ge {
        e -= 1;
    }

    // We want q = round(a / b * 2^target): 53 significant bits for normal
    // numbers, fixed point at 2^-1074 in the subnormal range.
    let target = if e < -1022 { 1074i64 } else { 52 - e };
    let (num, den) = if target >= 0 {
        (&a << target as usize, b)
    } else {
        (a, &b << (-target) as usize)
    };
    let (mut q, rem) = num.div_rem(&den);
    let round_up = match (&rem << 1usize).cmp(&den) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => q.is_odd(),
        std::cmp::Ordering::Less => false,
    };
    if round_up {
        q += 1u32;
    }

    let mut exp2 = if e < -1022 { -1074i64 } else { e - 52 };
    // Rounding can carry into the next power of two.
    if e >= -1022 && q.bits() == 54 {
        q >>= 1usize;
        exp2 += 1;
    }

    let magnitude = match q.to_u64() {
        Some(q) if exp2 <= 971 => (q as f64) * pow2(exp2), // exact product
        _ => f64::INFINITY,
    };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// 2^e as f64, exact over the full finite range.
fn pow2(e: i64) -> f64 {
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        // Subnormal scale, assembled in two exact steps.
        f64::from_bits(1u64 << (e + 1074) as u64)
    }
}

/// Sign of a rational as -1 / 0 / +1.
#[inline]
pub fn sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[inline]
fn sub2(a: &XPoint2, b: &XPoint2) -> XPoint2 {
    [&a[0] - &b[0], &a[1] - &b[1]]
}

/// Orientation of c relative to the directed line a->b: +1 left (ccw), -1
/// right, 0 collinear.
pub fn orient2d(a: &XPoint2, b: &XPoint2, c: &XPoint2) -> i8 {
    let u = sub2(b, a);
    let v = sub2(c, a);
    sign(&(&u[0] * &v[1] - &u[1] * &v[0]))
}

fn sub3(a: &XPoint, b: &XPoint) -> [Rat; 3] {
    [
        &a.0[0] - &b.0[0],
        &a.0[1] - &b.0[1],
        &a.0[2] - &b.0[2],
    ]
}

fn cross3(u: &[Rat; 3], v: &[Rat; 3]) -> [Rat; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn dot3(u: &[Rat; 3], v: &[Rat; 3]) -> Rat {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

/// Sign of the determinant [b-a, c-a, d-a]: +1 when d is on the positive side
/// of the oriented plane through a, b, c.
pub fn orient3d(a: &XPoint, b: &XPoint, c: &XPoint, d: &XPoint) -> i8 {
    let u = sub3(b, a);
    let v = sub3(c, a);
    let w = sub3(d, a);
    sign(&dot3(&cross3(&u, &v), &w))
}

/// True when the three (double-precision) points are exactly collinear.
pub fn points_collinear(a: &Point3, b: &Point3, c: &Point3) -> bool {
    let u = sub3(&XPoint::from_point3(b), &XPoint::from_point3(a));
    let v = sub3(&XPoint::from_point3(c), &XPoint::from_point3(a));
    cross3(&u, &v).iter().all(Rat::is_zero)
}

/// In-circle test for a CCW triangle (a, b, c): +1 when d lies strictly
/// inside the circumcircle, 0 when cocircular, -1 outside.
pub fn incircle(a: &XPoint2, b: &XPoint2, c: &XPoint2, d: &XPoint2) -> i8 {
    let adx = &a[0] - &d[0];
    let ady = &a[1] - &d[1];
    let bdx = &b[0] - &d[0];
    let bdy = &b[1] - &d[1];
    let cdx = &c[0] - &d[0];
    let cdy = &c[1] - &d[1];

    let ad2 = &adx * &adx + &ady * &ady;
    let bd2 = &bdx * &bdx + &bdy * &bdy;
    let cd2 = &cdx * &cdx + &cdy * &cdy;

    let det = &adx * (&bdy * &cd2 - &bd2 * &cdy) - &ady * (&bdx * &cd2 - &bd2 * &cdx)
        + &ad2 * (&bdx * &cdy - &bdy * &cdx);
    sign(&det)
}

/// Is p on the closed segment [a, b]?
pub fn on_segment_2d(p: &XPoint2, a: &XPoint2, b: &XPoint2) -> bool {
    if orient2d(a, b, p) != 0 {
        return false;
    }
    let ap = sub2(p, a);
    let ab = sub2(b, a);
    let t = &ap[0] * &ab[0] + &ap[1] * &ab[1];
    let len2 = &ab[0] * &ab[0] + &ab[1] * &ab[1];
    !t.is_negative() && t <= len2
}

/// Is p strictly inside the open segment (a, b) in 3D?
pub fn strictly_inside_segment_3d(p: &XPoint, a: &XPoint, b: &XPoint) -> bool {
    if p == a || p == b {
        return false;
    }
    let ap = sub3(p, a);
    let ab = sub3(b, a);
    if !cross3(&ap, &ab).iter().all(Rat::is_zero) {
        return false;
    }
    let t = dot3(&ap, &ab);
    let len2 = dot3(&ab, &ab);
    t.is_positive() && t < len2
}

/// Is p on the closed segment [a, b] in 3D?
pub fn on_segment_3d(p: &XPoint, a: &XPoint, b: &XPoint) -> bool {
    p == a || p == b || strictly_inside_segment_3d(p, a, b)
}

/// Point-in-triangle for a CCW 2D triangle, boundary inclusive.
pub fn in_triangle_2d(p: &XPoint2, a: &XPoint2, b: &XPoint2, c: &XPoint2) -> bool {
    orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0
}

/// Intersection point of properly crossing segments (both open interiors
/// intersect). Caller guarantees the crossing via orientation tests.
pub fn segment_crossing_2d(p1: &XPoint2, q1: &XPoint2, p2: &XPoint2, q2: &XPoint2) -> XPoint2 {
    let r = sub2(q1, p1);
    let s = sub2(q2, p2);
    let denom = &r[0] * &s[1] - &r[1] * &s[0];
    debug_assert!(!denom.is_zero());
    let pq = sub2(p2, p1);
    let t = (&pq[0] * &s[1] - &pq[1] * &s[0]) / denom;
    [&p1[0] + &r[0] * &t, &p1[1] + &r[1] * &t]
}

/// Supporting plane n . x = d of a triangle, with n the (unnormalized) cross
/// product of its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPlane {
    pub normal: [Rat; 3],
    pub offset: Rat,
}

impl XPlane {
    /// `None` when the three points are exactly collinear.
    pub fn from_triangle(a: &XPoint, b: &XPoint, c: &XPoint) -> Option<XPlane> {
        let normal = cross3(&sub3(b, a), &sub3(c, a));
        if normal.iter().all(Rat::is_zero) {
            return None;
        }
        let offset = dot3(&normal, &a.0);
        Some(XPlane { normal, offset })
    }

    /// Signed height of p over the plane (same sign convention as
    /// [`orient3d`] with the triangle's corners).
    pub fn height(&self, p: &XPoint) -> Rat {
        dot3(&self.normal, &p.0) - &self.offset
    }

    pub fn contains(&self, p: &XPoint) -> bool {
        self.height(p).is_zero()
    }

    /// Axis with the largest |normal| component; projecting this axis away
    /// keeps the triangle non-degenerate in 2D.
    pub fn dominant_axis(&self) -> usize {
        let mags: Vec<Rat> = self.normal.iter().map(Rat::abs).collect();
        let mut best = 0;
        for i in 1..3 {
            if mags[i] > mags[best] {
                best = i;
            }
        }
        best
    }

    /// Reconstruct the dropped coordinate of a projected point lying on this
    /// plane.
    pub fn lift(&self, p2: &XPoint2, axis: usize) -> XPoint {
        let u = (axis + 1) % 3;
        let v = (axis + 2) % 3;
        debug_assert!(!self.normal[axis].is_zero());
        let missing =
            (&self.offset - &self.normal[u] * &p2[0] - &self.normal[v] * &p2[1]) / &self.normal[axis];
        let mut coords = [Rat::zero(), Rat::zero(), Rat::zero()];
        coords[axis] = missing;
        coords[u] = p2[0].clone();
        coords[v] = p2[1].clone();
        XPoint(coords)
    }

    /// Orientation-insensitive canonical form: primitive integer normal with
    /// positive leading sign, plus matching offset. Two triangles lie in the
    /// same (unoriented) plane iff their keys are equal.
    pub fn canonical_key(&self) -> PlaneKey {
        let lcm_denoms = self
            .normal
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = self
            .normal
            .iter()
            .map(|c| c.numer() * (&lcm_denoms / c.denom()))
            .collect();
        let gcd = ints
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        debug_assert!(!gcd.is_zero());
        for c in &mut ints {
            *c = &*c / &gcd;
        }
        let flip = match ints.iter().find(|c| !c.is_zero()) {
            Some(c) if c.sign() == Sign::Minus => true,
            _ => false,
        };
        if flip {
            for c in &mut ints {
                *c = -&*c;
            }
        }
        // offset scales with the normal: d' = d * lcm / gcd (negated with it).
        let scale = Rat::new(
            if flip { -&lcm_denoms } else { lcm_denoms.clone() },
            gcd,
        );
        PlaneKey {
            normal: [ints[0].clone(), ints[1].clone(), ints[2].clone()],
            offset: &self.offset * scale,
        }
    }
}

/// Canonical unoriented-plane identifier; usable as an ordered map key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaneKey {
    pub normal: [BigInt; 3],
    pub offset: Rat,
}

/// Clip a convex CCW polygon by the half-plane on the left of a->b
/// (boundary inclusive).
fn clip_halfplane(poly: &[XPoint2], a: &XPoint2, b: &XPoint2) -> Vec<XPoint2> {
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let cur = &poly[i];
        let next = &poly[(i + 1) % n];
        let side_cur = orient2d(a, b, cur);
        let side_next = orient2d(a, b, next);
        if side_cur >= 0 {
            out.push(cur.clone());
        }
        if (side_cur > 0 && side_next < 0) || (side_cur < 0 && side_next > 0) {
            out.push(segment_crossing_2d(cur, next, a, b));
        }
    }
    out
}

/// Intersection of two convex CCW polygons (Sutherland-Hodgman). The result
/// list may contain repeated points for touching configurations; use
/// [`dedupe_ring`] before interpreting it.
pub fn clip_convex(subject: &[XPoint2], clip: &[XPoint2]) -> Vec<XPoint2> {
    let mut poly = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if poly.is_empty() {
            break;
        }
        poly = clip_halfplane(&poly, &clip[i], &clip[(i + 1) % n]);
    }
    poly
}

/// Remove consecutive duplicates (cyclically) from a polygon ring.
pub fn dedupe_ring(poly: &[XPoint2]) -> Vec<XPoint2> {
    let mut out: Vec<XPoint2> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last() != Some(p) {
            out.push(p.clone());
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Twice the signed area of a polygon ring.
pub fn ring_area_doubled(poly: &[XPoint2]) -> Rat {
    let n = poly.len();
    let mut acc = Rat::zero();
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        acc += &p[0] * &q[1] - &q[0] * &p[1];
    }
    acc
}
