//! Inverse design for 1D scalar conservation laws with uniformly convex flux
//! and their Hamilton–Jacobi counterparts.
//!
//! Given a target profile w and a horizon T > 0, this crate decides whether
//! any bounded initial datum evolves into w at time T (a one-sided decay
//! condition on f'(w)), constructs such data explicitly, characterizes the
//! full solution set — a convex cone with a unique extremal point — and
//! cross-validates every construction by forward evolution through two
//! independent solvers: a variational evaluator and a Godunov finite-volume
//! scheme.
//!
//! Module map:
//! - [`flux`] — the convex flux f, its inverse speed map g = (f')⁻¹ and the
//!   conjugate f*.
//! - [`piecewise`] — exact algebra on piecewise-linear-with-jumps profiles.
//! - [`oleinik`] — the backward-foot map p(x) = x − T·f'(w(x)), the
//!   attainability verdict, and the forced/free partition of the initial line.
//! - [`laxhopf`] — variational forward solvers for the conservation law and
//!   the Hamilton–Jacobi equation, plus the lift from state solutions to
//!   potential solutions.
//! - [`inverse`] — constructions of initial data reaching w and the
//!   membership characterizations in both state and potential form.
//! - [`oracle`] — the independent Godunov reference solver.
//! - [`cli`] — command-line front end and the randomized target corpus.

// Guards like `!(t > 0.0)` reject NaN along with the out-of-range values;
// the suggested `t <= 0.0` silently accepts NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod flux;
pub mod inverse;
pub mod laxhopf;
pub mod oleinik;
pub mod oracle;
pub mod parallel;
pub mod piecewise;

pub use flux::{ConvexFlux, FluxError, FluxSpec};
pub use inverse::{InverseProblem, MembershipReport};
pub use laxhopf::VariationalState;
pub use oleinik::{PMap, Partition};
pub use piecewise::{l1_distance, PiecewisePrimitive, PiecewiseProfile};
