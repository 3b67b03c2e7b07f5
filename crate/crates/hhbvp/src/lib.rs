//! Numerics workbench for n-point nonlocal boundary value problems driven by
//! Hilfer-Hadamard fractional derivatives on the interval (1, e].
//!
//! The library is organised around five layers:
//!
//! * [`expr`] — a small arithmetic expression language for the user-supplied
//!   scalar functions (the nonlinearity `f(t, x)` and the certification
//!   inputs `g`, `q`, `vartheta`, `w`).
//! * [`fraccalc`] — Hadamard-type fractional operators (integral, derivative,
//!   Caputo and Hilfer variants, the `t·d/dt` operator) evaluated by
//!   product-trapezoidal quadrature on a log-uniform grid.
//! * [`bvp`] — the boundary-value machinery: problem description, the
//!   closed-form constants of the linearised problem, the linear solution
//!   formula and the nonlinear fixed-point operator.
//! * [`certify`] — checkers for the Banach, Boyd-Wong, Krasnoselskii and
//!   Leray-Schauder existence/uniqueness conditions.
//! * [`solver`] — Picard iteration of the fixed-point operator plus residual
//!   verification of computed solutions.
//!
//! The [`cli`] module backs the `hhbvp` command line binary.

// Frozen reference constants keep their full 40-digit-derived prints.
#![allow(clippy::excessive_precision)]
// `!(x > 0.0)` is deliberate where NaN must be rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Stencil and convolution kernels read several offsets per index; plain
// index loops stay closer to the formulas than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod bvp;
pub mod certify;
pub mod cli;
pub mod expr;
pub mod fraccalc;
pub mod solver;
