//! Drift-analysis workbench.
//!
//! The crate is organised around five layers:
//!
//! - [`process`]: the [`Process`] abstraction, the catalog of random processes
//!   (coupon collector, winning streaks, random walks, RLS and the (1+1) EA,
//!   Recolour, random 2-SAT, random sorting, ...) and explicit finite chains.
//! - [`potential`]: potential functions and the transforms that lift a process
//!   onto a new real-valued view without changing its hitting times.
//! - [`oracle`]: exact expected hitting times (absorbing-chain solves, closed
//!   forms) used as ground truth.
//! - [`bounds`]: one calculator per drift theorem, each returning a
//!   [`BoundReport`].
//! - [`montecarlo`]: seeded, replayable simulation of hitting times,
//!   trajectories, tails and per-state drift.

pub mod bounds;
mod error;
pub mod montecarlo;
pub mod oracle;
pub mod potential;
pub mod process;
pub mod rng;

pub use bounds::{BoundReport, Direction, DriftFunction, FlagStatus, PreconditionFlag};
pub use error::{DriftError, Result};
pub use montecarlo::{RunStats, Trajectory};
pub use oracle::HittingTimeSolution;
pub use potential::Potential;
pub use process::{FiniteChain, Process};
