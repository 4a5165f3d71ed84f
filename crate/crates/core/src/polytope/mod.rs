//! The no-signaling polytope `A.P <= b`: its constraint rows, vertex
//! certification by tight-row rank, and classical-polytope membership by
//! exact linear programming.

pub mod classical;
pub mod constraints;
pub mod simplex;
pub mod vertex;

pub use classical::{classical_membership, ClassicalOptions, ClassicalReport, LocalityCertificate};
pub use constraints::{
    build_constraints, clique_form_rows, constraints_to_json, constraints_to_lp, dedup_rows, dimension,
    tight_rows, ConstraintRow, Relation, RowTag,
};
pub use vertex::{certify_vertex, VertexCertificate};
