pub mod commands;
pub mod lattice;
pub mod linalg;
pub mod orbifold;
pub mod polytope;
pub mod pwlinear;
pub mod rational;
pub mod synthetic;
pub mod xray;

pub use pwlinear::{LogConcavityVerdict, PLDensity, SlopeJump};
pub use rational::Rational;
