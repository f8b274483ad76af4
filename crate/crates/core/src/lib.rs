//! Multivariate fractal interpolation on tensor nets.
//!
//! The crate builds α-fractal functions `f^α` of continuous fields on a
//! k-dimensional box, evaluates them through their self-referential
//! equation with a certified truncation bound, and checks the analytic
//! properties of the associated fractal operator `f ↦ f^α`: perturbation
//! and norm bounds, bounded-below and inversion estimates, fixed points,
//! parameter convergence, invariant subspaces, `L^p` inequalities and
//! fractal-polynomial approximation.
//!
//! Everything here is pure computation over `alloc`; file formats and the
//! command line live in the `fractalis` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
pub mod error;
pub mod expr;
pub mod field;
pub mod fractal;
pub mod grid;
pub mod lp;
pub mod net;
pub mod operator;
pub mod sampling;

pub use error::{Error, Result};
pub use expr::{parse_field, FieldExpr};
pub use field::{Field, FieldRef};
pub use fractal::{EvalReport, FractalConfig};
pub use grid::{GridFunction, UniformGrid};
pub use net::{Domain, Net};
pub use operator::{BoundsReport, OperatorSpec};
