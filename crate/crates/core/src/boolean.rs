//! Face classification and assembly for mesh booleans.
//!
//! After co-refinement, every face of each mesh lies entirely inside or
//! entirely outside the other mesh's solid region (or is a registered
//! coplanar duplicate). One winding-number evaluation at the face barycenter
//! decides which, and a per-operation table turns that into keep /
//! keep-and-flip / discard. Coplanar duplicates bypass evaluation — their
//! barycenters sit exactly on the other surface — and are resolved purely
//! from relative orientation.
//!
//! For closed, embedded, outward-oriented inputs the output is again a
//! closed mesh bounding the set-algebra region. Immersed, self-overlapping,
//! or inside-out operands are classified by the same pointwise rule; their
//! outputs carry the inputs' winding multiplicities and are only as closed
//! as the inputs are embedded.

use thiserror::Error;

use crate::corefine::{corefine, CoplanarPair, CorefineDiagnostics, RefinedPair};
use crate::mesh::{MeshSide, TriMesh};
use crate::winding::{WindingField, WindingValue};

/// The boolean operation to perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersection,
    /// A minus B.
    DifferenceAB,
    /// B minus A.
    DifferenceBA,
    SymmetricDifference,
}

/// How a winding value converts to an inside/outside decision.
///
/// `WindingGtHalf` is the default: strictly more than half a winding counts
/// as inside, so open-boundary transition zones classify as outside. The
/// `Abs` variants treat inside-out (negative) regions as inside; the
/// `Positive` variants count any (absolute) winding above a 1e-9 dead band,
/// matching the integer rules for solid inputs while tolerating round-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsideRule {
    #[default]
    WindingGtHalf,
    AbsWindingGtHalf,
    WindingPositive,
    AbsWindingPositive,
}

/// Dead band for the `Positive` rules: |w| at or below this counts as zero.
pub const POSITIVE_RULE_DEAD_BAND: f64 = 1e-9;

/// Operation kind plus inside rule; the two axes are independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoolOpSpec {
    pub op: BoolOp,
    pub inside_rule: InsideRule,
}

impl BoolOpSpec {
    pub fn new(op: BoolOp) -> Self {
        BoolOpSpec {
            op,
            inside_rule: InsideRule::default(),
        }
    }

    pub fn with_rule(op: BoolOp, inside_rule: InsideRule) -> Self {
        BoolOpSpec { op, inside_rule }
    }
}

/// Is a point with winding value `w` inside, under the given rule?
pub fn inside(w: WindingValue, rule: InsideRule) -> bool {
    match rule {
        InsideRule::WindingGtHalf => w.value > 0.5,
        InsideRule::AbsWindingGtHalf => w.value.abs() > 0.5,
        InsideRule::WindingPositive => w.value > POSITIVE_RULE_DEAD_BAND,
        InsideRule::AbsWindingPositive => w.value.abs() > POSITIVE_RULE_DEAD_BAND,
    }
}

/// What happens to a classified face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceAction {
    Keep,
    KeepFlip,
    Discard,
}

/// A refined face tagged with its evaluation and fate.
#[derive(Debug, Clone, Copy)]
pub struct ClassifiedFace {
    pub source: MeshSide,
    /// Index into the refined mesh of `source`.
    pub face: u32,
    pub winding_of_other: WindingValue,
    pub action: FaceAction,
}

/// Action table: pure function of (operation, side, insideness).
fn action_for(op: BoolOp, side: MeshSide, is_inside: bool) -> FaceAction {
    use BoolOp::*;
    use FaceAction::*;
    use MeshSide::*;
    match (op, side, is_inside) {
        (Union, _, false) => Keep,
        (Union, _, true) => Discard,
        (Intersection, _, true) => Keep,
        (Intersection, _, false) => Discard,
        (DifferenceAB, A, false) => Keep,
        (DifferenceAB, A, true) => Discard,
        (DifferenceAB, B, true) => KeepFlip,
        (DifferenceAB, B, false) => Discard,
        (DifferenceBA, B, false) => Keep,
        (DifferenceBA, B, true) => Discard,
        (DifferenceBA, A, true) => KeepFlip,
        (DifferenceBA, A, false) => Discard,
        (SymmetricDifference, _, false) => Keep,
        (SymmetricDifference, _, true) => KeepFlip,
    }
}

/// Resolution of one coplanar duplicate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicateAction {
    /// Keep the copy from mesh A, original orientation.
    KeepA,
    /// Keep the copy from mesh B, original orientation.
    KeepB,
    DiscardBoth,
}

/// Orientation-based resolution of coplanar duplicates.
///
/// The difference rules: discard both when the copies have the same
/// orientation, keep the surviving operand's copy otherwise. Union and
/// intersection keep one copy of same-oriented duplicates (the region's
/// surface survives in both) and drop opposite-oriented ones (the surfaces
/// cancel); symmetric difference drops duplicates always. The non-difference
/// rows follow from evaluating the set algebra on the identical-solid and
/// externally-touching configurations.
pub fn resolve_coplanar(pairs: &[CoplanarPair], spec: BoolOpSpec) -> Vec<DuplicateAction> {
    use BoolOp::*;
    use DuplicateAction::*;
    pairs
        .iter()
        .map(|p| match (spec.op, p.same_orientation) {
            (Union, true) => KeepA,
            (Union, false) => DiscardBoth,
            (Intersection, true) => KeepA,
            (Intersection, false) => DiscardBoth,
            (DifferenceAB, true) => DiscardBoth,
            (DifferenceAB, false) => KeepA,
            (DifferenceBA, true) => DiscardBoth,
            (DifferenceBA, false) => KeepB,
            (SymmetricDifference, _) => DiscardBoth,
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum BooleanError {
    /// A barycenter landed exactly on the other mesh's surface. Co-refinement
    /// routes genuine coplanar overlaps to duplicate resolution, so this
    /// indicates a refinement defect rather than a degenerate input.
    #[error(
        "barycenter of refined {side:?} face {face} lies exactly on the other mesh (face {witness})"
    )]
    OnSurfaceBarycenter {
        side: MeshSide,
        face: u32,
        witness: usize,
    },
}

/// Classify every non-duplicate refined face by the winding number of the
/// *other* mesh at its barycenter. Evaluations are issued as one batch per
/// side.
pub fn classify(
    pair: &RefinedPair,
    spec: BoolOpSpec,
    field_a: &WindingField,
    field_b: &WindingField,
) -> Result<Vec<ClassifiedFace>, BooleanError> {
    let dup_a: std::collections::BTreeSet<u32> =
        pair.coplanar_pairs.iter().map(|p| p.face_a).collect();
    let dup_b: std::collections::BTreeSet<u32> =
        pair.coplanar_pairs.iter().map(|p| p.face_b).collect();

    let mut out = Vec::new();
    for (side, mesh, dup, field) in [
        (MeshSide::A, &pair.refined_a, &dup_a, field_b),
        (MeshSide::B, &pair.refined_b, &dup_b, field_a),
    ] {
        let faces: Vec<u32> = (0..mesh.face_count() as u32)
            .filter(|f| !dup.contains(f))
            .collect();
        let barycenters: Vec<_> = faces
            .iter()
            .map(|&f| mesh.barycenter(f as usize).expect("face in range"))
            .collect();
        let windings = field.eval_batch(&barycenters);
        for (&face, w) in faces.iter().zip(windings) {
            let w = w.map_err(|on| BooleanError::OnSurfaceBarycenter {
                side,
                face,
                witness: on.face,
            })?;
            out.push(ClassifiedFace {
                source: side,
                face,
                winding_of_other: w,
                action: action_for(spec.op, side, inside(w, spec.inside_rule)),
            });
        }
    }
    Ok(out)
}

/// Materialize the kept face set: Keep faces verbatim, KeepFlip faces with
/// reversed orientation, duplicates per their resolution. Vertices are welded
/// on exact double bit patterns; unused vertices and exactly-degenerate faces
/// are dropped. Face provenance is carried through.
pub fn assemble(
    classified: &[ClassifiedFace],
    duplicate_actions: &[DuplicateAction],
    pair: &RefinedPair,
) -> TriMesh {
    let mut picked: Vec<(MeshSide, u32, bool)> = Vec::new();
    for c in classified {
        match c.action {
            FaceAction::Keep => picked.push((c.source, c.face, false)),
            FaceAction::KeepFlip => picked.push((c.source, c.face, true)),
            FaceAction::Discard => {}
        }
    }
    debug_assert_eq!(duplicate_actions.len(), pair.coplanar_pairs.len());
    for (p, action) in pair.coplanar_pairs.iter().zip(duplicate_actions) {
        match action {
            DuplicateAction::KeepA => picked.push((MeshSide::A, p.face_a, false)),
            DuplicateAction::KeepB => picked.push((MeshSide::B, p.face_b, false)),
            DuplicateAction::DiscardBoth => {}
        }
    }

    let mut soup = TriMesh::empty();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut provenance = Vec::new();
    for (side, face, flip) in picked {
        let mesh = match side {
            MeshSide::A => &pair.refined_a,
            MeshSide::B => &pair.refined_b,
        };
        let f = face as usize;
        let pts = mesh.face_points(f);
        let base = vertices.len() as u32;
        vertices.extend(pts);
        let tri = if flip {
            crate::mesh::Triangle::new(base, base + 2, base + 1)
        } else {
            crate::mesh::Triangle::new(base, base + 1, base + 2)
        };
        faces.push(tri);
        provenance.push(
            mesh.provenance()
                .map(|p| p[f])
                .unwrap_or(crate::mesh::FaceProvenance {
                    source: side,
                    original_face: face,
                }),
        );
    }
    if !faces.is_empty() {
        soup = TriMesh::with_provenance(vertices, faces, provenance)
            .expect("assembled soup is well-formed");
    }

    let welded = soup.weld_exact();

    // Drop exactly-degenerate faces (repeated welded vertices are already
    // gone; exact collinearity remains possible after rounding).
    let keep: Vec<bool> = (0..welded.face_count())
        .map(|f| {
            let [p, q, r] = welded.face_points(f);
            !crate::exact::points_collinear(&p, &q, &r)
        })
        .collect();
    if keep.iter().all(|&k| k) {
        return welded;
    }
    let faces: Vec<_> = welded
        .faces()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(t, _)| *t)
        .collect();
    let provenance: Vec<_> = welded
        .provenance()
        .expect("provenance carried")
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    TriMesh::with_provenance(welded.vertices().to_vec(), faces, provenance)
        .expect("filtered mesh is well-formed")
        .weld_exact() // compact away now-unused vertices
}

/// Aggregate counters for one boolean run.
#[derive(Debug, Clone, Copy, Default)]
pub struct BooleanStats {
    pub kept_a: usize,
    pub flipped_a: usize,
    pub discarded_a: usize,
    pub kept_b: usize,
    pub flipped_b: usize,
    pub discarded_b: usize,
    pub duplicates_kept: usize,
    pub duplicates_discarded: usize,
    /// Smallest distance of any evaluated winding value to its decision
    /// boundary; a small margin means the classification leaned on round-off.
    pub min_classification_margin: Option<f64>,
    pub refined_faces_a: usize,
    pub refined_faces_b: usize,
    pub corefine: CorefineDiagnostics,
}

/// Result of a full boolean pipeline run.
#[derive(Debug)]
pub struct BooleanOutput {
    pub mesh: TriMesh,
    pub stats: BooleanStats,
}

fn margin(w: WindingValue, rule: InsideRule) -> f64 {
    match rule {
        InsideRule::WindingGtHalf => (w.value - 0.5).abs(),
        InsideRule::AbsWindingGtHalf => (w.value.abs() - 0.5).abs(),
        InsideRule::WindingPositive | InsideRule::AbsWindingPositive => w.value.abs(),
    }
}

pub fn collect_stats(
    classified: &[ClassifiedFace],
    duplicate_actions: &[DuplicateAction],
    pair: &RefinedPair,
    spec: BoolOpSpec,
) -> BooleanStats {
    let mut stats = BooleanStats {
        refined_faces_a: pair.refined_a.face_count(),
        refined_faces_b: pair.refined_b.face_count(),
        corefine: pair.diagnostics,
        ..Default::default()
    };
    for c in classified {
        let slot = match (c.source, c.action) {
            (MeshSide::A, FaceAction::Keep) => &mut stats.kept_a,
            (MeshSide::A, FaceAction::KeepFlip) => &mut stats.flipped_a,
            (MeshSide::A, FaceAction::Discard) => &mut stats.discarded_a,
            (MeshSide::B, FaceAction::Keep) => &mut stats.kept_b,
            (MeshSide::B, FaceAction::KeepFlip) => &mut stats.flipped_b,
            (MeshSide::B, FaceAction::Discard) => &mut stats.discarded_b,
        };
        *slot += 1;
        let m = margin(c.winding_of_other, spec.inside_rule);
        stats.min_classification_margin = Some(match stats.min_classification_margin {
            Some(cur) => cur.min(m),
            None => m,
        });
    }
    for action in duplicate_actions {
        match action {
            DuplicateAction::DiscardBoth => stats.duplicates_discarded += 1,
            _ => stats.duplicates_kept += 1,
        }
    }
    stats
}

/// The whole pipeline: co-refine, classify by batch winding evaluation,
/// resolve coplanar duplicates, assemble. `threads` follows the winding
/// batch contract (0 = auto); results are bitwise independent of it.
pub fn mesh_boolean(
    a: &TriMesh,
    b: &TriMesh,
    spec: BoolOpSpec,
    threads: usize,
) -> Result<BooleanOutput, BooleanError> {
    let pair = corefine(a, b);
    let field_a = WindingField::new(&pair.refined_a, threads);
    let field_b = WindingField::new(&pair.refined_b, threads);
    let classified = classify(&pair, spec, &field_a, &field_b)?;
    let duplicate_actions = resolve_coplanar(&pair.coplanar_pairs, spec);
    let stats = collect_stats(&classified, &duplicate_actions, &pair, spec);
    let mesh = assemble(&classified, &duplicate_actions, &pair);
    Ok(BooleanOutput { mesh, stats })
}
