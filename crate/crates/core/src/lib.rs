//! Last-iterate learning in two-player zero-sum normal-form games.
//!
//! The crate implements multiplicative weights (MWU), its optimistic variant
//! (OMWU) and mutant MWU (M2WU), which adds a mutation term pulling each
//! strategy toward a reference. With a fixed reference M2WU converges to the
//! stationary point of the replicator-mutator dynamics, an approximate
//! equilibrium; refreshing the reference every `N` steps drives it to an exact
//! Nash equilibrium.
//!
//! Modules:
//! - [`game`]: payoff matrices, exploitability, KL divergence, preset games.
//! - [`feedback`]: exact and noisy gradient observations.
//! - [`learners`]: the discrete update rules and the run loop.
//! - [`dynamics`]: continuous-time RMD integration and stationary points.
//! - [`harness`]: experiment configs, presets, CSV output, verification suite.

// NaN must fail range checks, so `!(x > 0.0)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod game;
pub mod harness;
pub mod learners;
pub mod trace;

pub use error::{Error, Result};
pub use feedback::{derive_seeds, FeedbackChannel, NoiseKind, NoiseModel};
pub use game::{kl, kl_profile, GameMatrix, Player, Strategy, StrategyProfile};
pub use learners::{run, Algorithm, LearnerState, Mutation, RunSpec, Schedule, Simulation};
pub use trace::{RunTrace, Snapshot, Summary};
