//! Budget-constrained contextual bandits with arm-dependent delayed feedback.
//!
//! The crate simulates a world with a finite set of context classes, linear
//! rewards and per-arm delay distributions, and runs four agents against it:
//!
//! * DORAL: a patient race on observed delays picks the most responsive
//!   arms and a cut-off, then a per-round allocation LP weighted by each
//!   arm's probability of returning feedback in time drives a delayed
//!   LinUCB learner.
//! * D-LinUCB: greedy delayed LinUCB over every arm.
//! * Random: D-LinUCB that only acts with probability equal to the share of
//!   budget still left.
//! * D-ALP: the allocation stage of DORAL over every arm, ignoring delays.
//!
//! [`harness`] wraps everything into configurable, seeded experiments with
//! CSV and chart output.

pub mod allocation;
pub mod env;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod identify;
pub mod linear;
pub mod policies;

pub use error::{Error, Result};
