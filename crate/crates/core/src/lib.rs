//! Construction and verification of (n,r)-arcs in PG(2,q).
//!
//! Arcs are built by prescribing a cyclic group `<A> <= GL(3,q)`, forming
//! the orbit incidence matrix `M^G`, and solving the binary packing program
//! `max { w.x : M^G x <= r }` by branch-and-bound.

pub mod arcs;
pub mod corpus;
pub mod field;
pub mod ilp;
pub mod orbits;
pub mod plane;
pub mod search;

pub use arcs::{ArcFile, ArcRecord, LineSpectrum};
pub use field::{FieldElement, FieldSpec};
pub use ilp::{PackingModel, Solution, SolveStatus, SolverConfig};
pub use orbits::{ActionSide, GeneratorMatrix, OrbitIncidence, OrbitSystem};
pub use plane::{PlaneIndex, ProjLine, ProjPoint};
