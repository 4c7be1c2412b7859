//! Boolean operations on oriented triangle meshes via generalized winding
//! numbers.
//!
//! The pipeline: co-refine the two inputs so their mutual intersections lie
//! on shared vertices and edges ([`corefine`]), evaluate each refined face's
//! winding number with respect to the other mesh at its barycenter
//! ([`winding`]), then keep, keep-and-flip, or discard faces according to the
//! requested operation and assemble the result ([`boolean`]). Inputs may be
//! open, non-manifold, or self-intersecting; closed solid inputs produce
//! closed solid outputs.

pub mod boolean;
pub mod corefine;
pub mod exact;
pub mod io;
pub mod kahan;
pub mod mesh;
pub mod shapes;
pub mod winding;

pub use boolean::{mesh_boolean, BoolOp, BoolOpSpec, InsideRule};
pub use mesh::{MeshAudit, Point3, TriMesh, Triangle, Vec3};
pub use winding::{winding_number, WindingValue};
