//! Discontinuous Galerkin solver for nonlinear conservation laws with entropy
//! correction artificial viscosity.

pub mod linalg;
pub mod refelem;
pub mod mesh;
pub mod physics;
pub mod dgcore;
pub mod viscosity;
pub mod shockcap;
pub mod semidiscrete;
pub mod timeint;
