//! Mixed-integer convex quadratic programming.
//!
//! This crate provides a model container ([`MipModel`]), a reference
//! branch-and-bound solver over convex QP relaxations ([`solve`]), and an
//! LP-format text adapter ([`write_lp`] / [`read_lp`]) for cross-checking
//! models against external solvers.
//!
//! The solver is exact up to the configured tolerances: relaxations are
//! solved by an operator-splitting method and polished to KKT points, the
//! tree search is best-first on relaxation bounds, and branching picks the
//! most-fractional binary with ties to the lowest variable id.

mod bb;
mod error;
mod lp;
mod model;
mod qp;
#[doc(hidden)]
pub mod selftest;

pub use bb::{solve, MipStatus, Solution, SolverConfig};
pub use error::{MipError, Result};
pub use lp::{read_lp, write_lp};
pub use model::{ConstraintId, MipModel, Sense, Var, VarKind};
