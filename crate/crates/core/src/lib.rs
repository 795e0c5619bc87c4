//! Symbolic jet-space engine for conservation laws of PDE systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] is the expression kernel: exact rational functions over atomic
//!   kernels, with partial and total differentiation and zero testing.
//! * [`jet`] holds rankings, orthonomic systems and reduction to normal form
//!   on solutions.
//! * [`variational`] provides Euler operators, formal adjoints and the
//!   homotopy reconstruction of fluxes.
//! * [`claws`] builds conservation laws, multipliers, the Lagrange-multiplier
//!   bridge for families that depend on constrained functions, and first
//!   integrals.
//! * [`symmetry`] covers generalized symmetry characteristics and the
//!   variational-symmetry/multiplier correspondence.
//! * [`hodograph`] swaps a dependent and an independent variable.
//! * [`problem`] parses and prints the `.clw` problem format.
//! * [`gen`] draws seeded random expressions for property checks.

pub mod claws;
pub mod error;
pub mod expr;
pub mod gen;
pub mod hodograph;
pub mod jet;
pub mod problem;
pub mod space;
pub mod symmetry;
pub mod variational;

pub use error::{Error, Result};
pub use expr::{Atom, Expr, Verdict, ZeroTest};
pub use space::{Field, JetVar, MultiIndex, Space};
