//! Exact and adaptive-precision reals, continued fractions and
//! one-dimensional Dirichlet approximation.

pub mod alg;
pub mod cf;
pub mod dirichlet;
pub mod draw;
pub mod fixed;
pub mod ratfunc;
mod real;
pub mod search;

pub use cf::{cf_expand, convergents, CfExpansion, Convergent};
pub use dirichlet::{bad_constant_lower, dirichlet_approx, dirichlet_profile, dirichlet_sweep, DirichletWitness};
pub use real::{parse_decimal, ExactReal};
