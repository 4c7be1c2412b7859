//! Constrained Delaunay triangulation of a triangular domain, on exact
//! rational coordinates.
//!
//! The domain is a single (CCW) triangle; every inserted point lies inside it
//! or on its boundary, and every constraint edge connects existing vertices
//! with no vertex in its interior and no crossing constraint — the caller
//! pre-splits segments at all incidences. Exact predicates make every branch
//! decision reliable; the only freedom left is the diagonal choice between
//! cocircular points, which [`Cdt::canonicalize`] pins to the lexicographically
//! smallest diagonal so that two triangulations of the same region always
//! agree.

use std::collections::BTreeSet;

use crate::exact::{incircle, orient2d, XPoint2};

#[derive(Debug, Clone)]
struct CdtTri {
    /// Vertex ids, counter-clockwise. Edge `i` runs v[i] -> v[(i+1)%3].
    v: [usize; 3],
    /// Triangle index across edge `i`.
    nbr: [Option<usize>; 3],
    alive: bool,
}

#[derive(Debug)]
pub struct Cdt {
    pts: Vec<XPoint2>,
    tris: Vec<CdtTri>,
    constrained: BTreeSet<(usize, usize)>,
}

#[derive(Debug)]
enum Location {
    Interior(usize),
    OnEdge(usize, usize),
    OnVertex(usize),
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Cdt {
    /// Start from one CCW triangle.
    pub fn new(a: XPoint2, b: XPoint2, c: XPoint2) -> Cdt {
        debug_assert_eq!(orient2d(&a, &b, &c), 1, "domain triangle must be CCW");
        Cdt {
            pts: vec![a, b, c],
            tris: vec![CdtTri {
                v: [0, 1, 2],
                nbr: [None, None, None],
                alive: true,
            }],
            constrained: BTreeSet::new(),
        }
    }

    /// Alive triangles, CCW.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .filter(|t| t.alive)
            .map(|t| t.v)
            .collect()
    }

    fn locate(&self, p: &XPoint2) -> Location {
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            let mut zero_edge = None;
            let mut zeros = 0;
            let mut outside = false;
            for e in 0..3 {
                let a = &self.pts[t.v[e]];
                let b = &self.pts[t.v[(e + 1) % 3]];
                match orient2d(a, b, p) {
                    -1 => {
                        outside = true;
                        break;
                    }
                    0 => {
                        zeros += 1;
                        zero_edge = Some(e);
                    }
                    _ => {}
                }
            }
            if outside {
                continue;
            }
            return match zeros {
                0 => Location::Interior(ti),
                1 => Location::OnEdge(ti, zero_edge.unwrap()),
                _ => {
                    // On two edge lines at once: coincides with their shared
                    // vertex.
                    let i = (0..3)
                        .find(|&i| self.pts[t.v[i]] == *p)
                        .expect("point on two edges must be a vertex");
                    Location::OnVertex(t.v[i])
                }
            };
        }
        panic!("point outside the triangulation domain");
    }

    /// Insert a point that lies inside the domain (or on its boundary).
    /// Returns its vertex id; inserting a coincident point returns the
    /// existing id.
    pub fn insert(&mut self, p: XPoint2) -> usize {
        match self.locate(&p) {
            Location::OnVertex(v) => v,
            Location::Interior(t) => {
                let pid = self.pts.len();
                self.pts.push(p);
                self.split_interior(t, pid);
                pid
            }
            Location::OnEdge(t, e) => {
                let pid = self.pts.len();
                self.pts.push(p);
                self.split_edge(t, e, pid);
                pid
            }
        }
    }

    fn set_nbr(&mut self, tri: Option<usize>, old: usize, new: Option<usize>) {
        if let Some(ti) = tri {
            for e in 0..3 {
                if self.tris[ti].nbr[e] == Some(old) {
                    self.tris[ti].nbr[e] = new;
                    return;
                }
            }
        }
    }

    fn push_tri(&mut self, v: [usize; 3], nbr: [Option<usize>; 3]) -> usize {
        self.tris.push(CdtTri {
            v,
            nbr,
            alive: true,
        });
        self.tris.len() - 1
    }

    fn split_interior(&mut self, t: usize, p: usize) {
        let CdtTri { v: [a, b, c], nbr, .. } = self.tris[t].clone();
        self.tris[t].alive = false;
        let t0 = self.tris.len();
        // (a,b,p), (b,c,p), (c,a,p)
        self.push_tri([a, b, p], [nbr[0], Some(t0 + 1), Some(t0 + 2)]);
        self.push_tri([b, c, p], [nbr[1], Some(t0 + 2), Some(t0)]);
        self.push_tri([c, a, p], [nbr[2], Some(t0), Some(t0 + 1)]);
        self.set_nbr(nbr[0], t, Some(t0));
        self.set_nbr(nbr[1], t, Some(t0 + 1));
        self.set_nbr(nbr[2], t, Some(t0 + 2));
        self.legalize(t0, 0, p);
        self.legalize(t0 + 1, 0, p);
        self.legalize(t0 + 2, 0, p);
    }

    fn split_edge(&mut self, t: usize, e: usize, p: usize) {
        let tv = self.tris[t].v;
        let tn = self.tris[t].nbr;
        let (u, v, w) = (tv[e], tv[(e + 1) % 3], tv[(e + 2) % 3]);
        let s = tn[e];
        self.tris[t].alive = false;

        // The split edge may already be constrained (it can be a previously
        // inserted constraint only in the caller's pre-split world, where no
        // point lands strictly inside a constraint; keep the invariant clear).
        debug_assert!(!self.constrained.contains(&edge_key(u, v)));

        let t1 = self.tris.len();
        // Replace t with (u,p,w) and (p,v,w).
        self.push_tri([u, p, w], [None, Some(t1 + 1), tn[(e + 2) % 3]]);
        self.push_tri([p, v, w], [None, tn[(e + 1) % 3], Some(t1)]);
        self.set_nbr(tn[(e + 2) % 3], t, Some(t1));
        self.set_nbr(tn[(e + 1) % 3], t, Some(t1 + 1));

        if let Some(si) = s {
            let sv = self.tris[si].v;
            let sn = self.tris[si].nbr;
            // s holds the directed edge (v, u); x is opposite.
            let se = (0..3)
                .find(|&i| sv[i] == v && sv[(i + 1) % 3] == u)
                .expect("neighbor must share the edge");
            let x = sv[(se + 2) % 3];
            self.tris[si].alive = false;
            let s1 = self.tris.len();
            // Replace s with (v,p,x) and (p,u,x).
            self.push_tri([v, p, x], [None, Some(s1 + 1), sn[(se + 2) % 3]]);
            self.push_tri([p, u, x], [None, sn[(se + 1) % 3], Some(s1)]);
            self.set_nbr(sn[(se + 2) % 3], si, Some(s1));
            self.set_nbr(sn[(se + 1) % 3], si, Some(s1 + 1));
            // Stitch across the split edge: (u,p)&(p,u), (p,v)&(v,p).
            self.tris[t1].nbr[0] = Some(s1 + 1);
            self.tris[s1 + 1].nbr[0] = Some(t1);
            self.tris[t1 + 1].nbr[0] = Some(s1);
            self.tris[s1].nbr[0] = Some(t1 + 1);

            self.legalize(t1, 2, p);
            self.legalize(t1 + 1, 1, p);
            self.legalize(s1, 2, p);
            self.legalize(s1 + 1, 1, p);
        } else {
            self.legalize(t1, 2, p);
            self.legalize(t1 + 1, 1, p);
        }
    }

    /// Restore the Delaunay criterion across edge `e` of triangle `t`; `p` is
    /// the freshly inserted vertex opposite that edge.
    fn legalize(&mut self, t: usize, e: usize, p: usize) {
        let (u, v) = (self.tris[t].v[e], self.tris[t].v[(e + 1) % 3]);
        debug_assert_eq!(self.tris[t].v[(e + 2) % 3], p);
        if self.constrained.contains(&edge_key(u, v)) {
            return;
        }
        let Some(s) = self.tris[t].nbr[e] else { return };
        let sv = self.tris[s].v;
        let se = (0..3)
            .find(|&i| sv[i] == v && sv[(i + 1) % 3] == u)
            .expect("neighbor must share the edge");
        let x = sv[(se + 2) % 3];
        if incircle(&self.pts[u], &self.pts[v], &self.pts[p], &self.pts[x]) <= 0 {
            return;
        }
        let (t1, t2) = self.flip(t, e);
        // Both new triangles contain p; continue on their edges opposite p.
        let e1 = (0..3)
            .find(|&i| {
                self.tris[t1].v[i] != p && self.tris[t1].v[(i + 1) % 3] != p
            })
            .unwrap();
        let e2 = (0..3)
            .find(|&i| {
                self.tris[t2].v[i] != p && self.tris[t2].v[(i + 1) % 3] != p
            })
            .unwrap();
        self.legalize(t1, e1, p);
        self.legalize(t2, e2, p);
    }

    /// Flip the diagonal shared by triangle `t` (edge `e`) and its neighbor.
    /// Returns the two replacement triangles.
    fn flip(&mut self, t: usize, e: usize) -> (usize, usize) {
        let tv = self.tris[t].v;
        let tn = self.tris[t].nbr;
        let (u, v, w) = (tv[e], tv[(e + 1) % 3], tv[(e + 2) % 3]);
        let s = tn[e].expect("flip needs a neighbor");
        let sv = self.tris[s].v;
        let sn = self.tris[s].nbr;
        let se = (0..3)
            .find(|&i| sv[i] == v && sv[(i + 1) % 3] == u)
            .expect("neighbor must share the edge");
        let x = sv[(se + 2) % 3];

        self.tris[t].alive = false;
        self.tris[s].alive = false;

        let b_tri = tn[(e + 1) % 3]; // across (v,w)
        let a_tri = tn[(e + 2) % 3]; // across (w,u)
        let c_tri = sn[(se + 1) % 3]; // across (u,x)
        let d_tri = sn[(se + 2) % 3]; // across (x,v)

        let n1 = self.tris.len();
        // (u,x,w) and (x,v,w), sharing (x,w).
        self.push_tri([u, x, w], [c_tri, Some(n1 + 1), a_tri]);
        self.push_tri([x, v, w], [d_tri, b_tri, Some(n1)]);

        self.set_nbr(a_tri, t, Some(n1));
        self.set_nbr(b_tri, t, Some(n1 + 1));
        self.set_nbr(c_tri, s, Some(n1));
        self.set_nbr(d_tri, s, Some(n1 + 1));
        (n1, n1 + 1)
    }

    fn find_directed_edge(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            for e in 0..3 {
                if t.v[e] == a && t.v[(e + 1) % 3] == b {
                    return Some((ti, e));
                }
            }
        }
        None
    }

    /// Insert the constraint edge (u, v). The segment contains no other
    /// vertex and crosses no constrained edge.
    pub fn insert_constraint(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        if self.find_directed_edge(u, v).is_some() || self.find_directed_edge(v, u).is_some() {
            self.constrained.insert(edge_key(u, v));
            return;
        }

        let pu = self.pts[u].clone();
        let pv = self.pts[v].clone();

        // Find the triangle at u whose opposite edge the segment enters: for
        // CCW (u, a, b), the direction u->v lies in the interior wedge iff a
        // is strictly right and b strictly left of it.
        let mut entry = None;
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            let Some(i) = (0..3).find(|&i| t.v[i] == u) else { continue };
            let a = t.v[(i + 1) % 3];
            let b = t.v[(i + 2) % 3];
            let oa = orient2d(&pu, &pv, &self.pts[a]);
            let ob = orient2d(&pu, &pv, &self.pts[b]);
            if oa < 0 && ob > 0 {
                entry = Some((ti, b, a));
                break;
            }
        }
        let (mut cur, mut left_v, mut right_v) =
            entry.expect("constraint endpoint has a triangle toward the target");

        let mut left_chain = vec![left_v];
        let mut right_chain = vec![right_v];
        let mut dead = vec![cur];

        loop {
            debug_assert!(
                !self.constrained.contains(&edge_key(left_v, right_v)),
                "constraint would cross another constraint"
            );
            let next = self
                .tris[cur]
                .nbr[(0..3)
                    .find(|&e| {
                        let t = &self.tris[cur];
                        (t.v[e] == left_v && t.v[(e + 1) % 3] == right_v)
                            || (t.v[e] == right_v && t.v[(e + 1) % 3] == left_v)
                    })
                    .expect("crossed edge belongs to current triangle")]
                .expect("crossed edge cannot be on the hull");
            dead.push(next);
            let nv = self.tris[next].v;
            let c = nv
                .into_iter()
                .find(|&w| w != left_v && w != right_v)
                .unwrap();
            if c == v {
                break;
            }
            match orient2d(&pu, &pv, &self.pts[c]) {
                1 => {
                    left_chain.push(c);
                    left_v = c;
                }
                -1 => {
                    right_chain.push(c);
                    right_v = c;
                }
                _ => panic!("vertex lies on a constraint interior; segments were not pre-split"),
            }
            cur = next;
        }

        for &ti in &dead {
            self.tris[ti].alive = false;
        }

        // Left cavity: chain runs strictly left of u->v; right cavity mirrors.
        self.retriangulate_cavity(&left_chain, u, v);
        let flipped: Vec<usize> = right_chain;
        self.retriangulate_cavity_right(&flipped, u, v);
        self.constrained.insert(edge_key(u, v));
        self.rebuild_neighbors();
    }

    /// Triangulate the pseudo-polygon left of u->v (chain ordered from u to v).
    fn retriangulate_cavity(&mut self, chain: &[usize], u: usize, v: usize) {
        if chain.is_empty() {
            return;
        }
        // Pick the chain vertex whose circumcircle with (u, v) is empty.
        let mut ci = 0;
        for i in 1..chain.len() {
            if incircle(
                &self.pts[u],
                &self.pts[v],
                &self.pts[chain[ci]],
                &self.pts[chain[i]],
            ) > 0
            {
                ci = i;
            }
        }
        let c = chain[ci];
        self.push_tri([u, v, c], [None, None, None]);
        self.retriangulate_cavity(&chain[..ci], u, c);
        self.retriangulate_cavity(&chain[ci + 1..], c, v);
    }

    /// Triangulate the pseudo-polygon right of u->v: same cavity routine on
    /// the reversed base edge.
    fn retriangulate_cavity_right(&mut self, chain: &[usize], u: usize, v: usize) {
        if chain.is_empty() {
            return;
        }
        let mut ci = 0;
        for i in 1..chain.len() {
            if incircle(
                &self.pts[v],
                &self.pts[u],
                &self.pts[chain[ci]],
                &self.pts[chain[i]],
            ) > 0
            {
                ci = i;
            }
        }
        let c = chain[ci];
        self.push_tri([v, u, c], [None, None, None]);
        self.retriangulate_cavity_right(&chain[..ci], u, c);
        self.retriangulate_cavity_right(&chain[ci + 1..], c, v);
    }

    /// Recompute all neighbor links from scratch.
    fn rebuild_neighbors(&mut self) {
        use std::collections::BTreeMap;
        let mut by_edge: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            for e in 0..3 {
                by_edge.insert((t.v[e], t.v[(e + 1) % 3]), (ti, e));
            }
        }
        for ti in 0..self.tris.len() {
            if !self.tris[ti].alive {
                continue;
            }
            for e in 0..3 {
                let a = self.tris[ti].v[e];
                let b = self.tris[ti].v[(e + 1) % 3];
                self.tris[ti].nbr[e] = by_edge.get(&(b, a)).map(|&(t, _)| t);
            }
        }
    }

    /// Resolve every cocircular diagonal toward the lexicographically smaller
    /// point pair. Cocircular quads are the only freedom the Delaunay
    /// criterion leaves; pinning them makes the triangulation a pure function
    /// of the point and constraint sets.
    pub fn canonicalize(&mut self) {
        loop {
            let mut flipped = false;
            'scan: for ti in 0..self.tris.len() {
                if !self.tris[ti].alive {
                    continue;
                }
                for e in 0..3 {
                    let t = &self.tris[ti];
                    let (u, v, w) = (t.v[e], t.v[(e + 1) % 3], t.v[(e + 2) % 3]);
                    if self.constrained.contains(&edge_key(u, v)) {
                        continue;
                    }
                    let Some(s) = t.nbr[e] else { continue };
                    let sv = self.tris[s].v;
                    let Some(se) = (0..3).find(|&i| sv[i] == v && sv[(i + 1) % 3] == u) else {
                        continue;
                    };
                    let x = sv[(se + 2) % 3];
                    if incircle(&self.pts[u], &self.pts[v], &self.pts[w], &self.pts[x]) != 0 {
                        continue;
                    }
                    if self.diag_key(w, x) >= self.diag_key(u, v) {
                        continue;
                    }
                    // The quad of four cocircular points is strictly convex,
                    // so the flip is valid.
                    self.flip(ti, e);
                    flipped = true;
                    break 'scan;
                }
            }
            if !flipped {
                return;
            }
        }
    }

    fn diag_key(&self, a: usize, b: usize) -> (XPoint2, XPoint2) {
        let pa = self.pts[a].clone();
        let pb = self.pts[b].clone();
        if pa <= pb {
            (pa, pb)
        } else {
            (pb, pa)
        }
    }
}
