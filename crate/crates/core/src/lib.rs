//! Probabilistic multi-variable cardinality branching (PMVB) for binary MILP.
//!
//! The crate is `no_std` (with `alloc`) so the algorithmic pieces can be
//! embedded anywhere; IO, file formats and the CLI live in `pmvb-lab`.
//!
//! Layout:
//! - [`model`]: problem and solution data model.
//! - [`lp`]: dense bounded-variable revised simplex, Mehrotra interior point,
//!   and the closed-form fractional knapsack.
//! - [`bnb`]: LP-based branch-and-bound with cuts, cutoffs and limits, plus
//!   exact oracles.
//! - [`predict`]: per-variable probabilities from logistic models or the LP
//!   root relaxation.
//! - [`pmvb`]: accuracy statistics, threshold calibration, cardinality
//!   hyperplanes, the four-region partition and the branching driver.
//! - [`instgen`]: seeded instance families.
// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bnb;
pub mod clock;
pub mod instgen;
pub mod lp;
pub mod model;
pub mod pmvb;
pub mod predict;

mod linalg;
mod math;

pub use bnb::{brute_force, dp_knapsack, solve_mip_with_clock, SolveError, SolveOptions, SolveReport};
#[cfg(feature = "std")]
pub use bnb::solve_mip;
pub use clock::Clock;
pub use model::{LinearCut, MipInstance, ModelError, ObjectiveSense, Row, RowSense, Solution, SolutionStatus};
pub use predict::{Prediction, PredictionSource};
