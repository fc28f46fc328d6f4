//! Deformation theory of fusion categories and monoidal functors over exact fields.

pub mod arith;
pub mod coherence;
pub mod cochain;
pub mod complex;
pub mod complexes;
pub mod deform;
pub mod engine;
pub mod examples;
pub mod functor;
pub mod hochschild;
pub mod fusion;
pub mod linalg;
pub mod reassoc;
pub mod tree;
