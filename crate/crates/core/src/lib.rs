//! Nonlocal energy functionals on finite metric measure spaces.
//!
//! The crate builds discretized spaces, evaluates fractional and
//! threshold-type pair energies with deterministic parallel reductions,
//! estimates their small-parameter limits, and checks the inequalities
//! relating them with constants measured on the space.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod functionals;
pub mod kernel;
pub mod limits;
pub mod parallel;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{pair_rho, KernelSpec, PairRho};
pub use space::{build_space, MetricMeasureSpace, SpaceSpec};
