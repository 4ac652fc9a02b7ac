//! Core algorithms for explaining traffic-aware route choices.
//!
//! Given a road network with free-flow arc weights `ell` and traffic arc
//! weights `upper`, and a route `P` that is shortest under traffic, this
//! crate computes a *simple valid explanation* (SVE): a weight assignment
//! `w` with `ell <= w <= upper` under which `P` is still shortest, chosen
//! to minimize the tau-weighted excess `sum tau(e) * (w_e - ell(e))`.
//! The support of `w` (arcs raised above free-flow) is the human-facing
//! answer to "which traffic conditions make this route optimal?".
//!
//! The solver works on the linear-programming dual: a circulation with
//! per-arc slack splits, improved by canceling positive-weight cycles in
//! a residual graph until a zero-duality-gap certificate exists. All
//! arithmetic is exact integer arithmetic; there are no tolerances.
//!
//! The crate is `no_std` (with `alloc`): it contains no IO. File formats,
//! the CLI, and the evaluation harness live in the companion crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cut;
pub mod eval;
pub mod flow;
pub mod graph;
pub mod oracle;
pub mod pbe;
pub mod scenario;
pub mod weight;

pub use cut::{Explanation, ExplanationInstance, TauOption, TauVector};
pub use flow::{solve_sve, Certificate, FlowSolution, SolveConfig};
pub use graph::{ArcId, GraphBuilder, Path, RoadGraph, VertexId, WeightVector};
pub use weight::Weight;
