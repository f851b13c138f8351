//! Steklov eigenvalues of warped products over interval and ball bases.
//!
//! A warped product carries the metric `g_Omega + h^2 g_Sigma` for a positive
//! warping function h on the base. Separation of variables turns its Steklov
//! problem into a family of weighted 1D Steklov problems on the base, one per
//! fiber Laplace eigenvalue; this crate solves those with P1 finite elements
//! and a tridiagonal Dirichlet-to-Neumann reduction, merges them into the
//! full spectrum with certified truncation, and evaluates the closed-form
//! upper bounds, asymptotics, stability estimates and extremal families that
//! the spectrum satisfies.
//!
//! Modules:
//! - [`geometry`]: bases, fibers, warping functions, measures and norms.
//! - [`sturm`]: the auxiliary 1D solver (assembly, DtN reduction).
//! - [`spectrum`]: the certified multiset merge and labelled access.
//! - [`bounds`]: inequality evaluators and verdict reports.
//! - [`families`]: extremal constructions and parameter sweeps.

// NaN-rejecting range guards read better as `!(x >= 1.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)] // index-heavy assembly code
#![allow(clippy::too_many_arguments)]

pub mod bounds;
pub mod error;
pub mod families;
pub mod geometry;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod spectrum;
pub mod sturm;

pub use error::{Error, Result};
