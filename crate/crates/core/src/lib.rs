//! Exact Diophantine approximation, lattice orbit diagnostics and
//! interference-alignment constellations.
//!
//! Numbers are [`ExactReal`]s: elements of a multi-quadratic field, optionally
//! extended by seeded uniform draws. Comparisons are certified; anything that
//! cannot be certified within the precision cap is reported as an error
//! rather than guessed.

pub mod channels;
pub mod dof;
pub mod error;
pub mod exactnum;
pub mod latdyn;
pub mod limits;
pub mod linforms;
pub mod measures;

pub use error::{Error, Result};
pub use exactnum::ExactReal;
pub use limits::Limits;
