pub mod aq;
pub mod boxes;
pub mod cli;
pub mod distill;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod games;
pub mod orthograph;
pub mod polytope;
pub mod rational;
pub mod scenario;
pub mod witness;
