//! Simulation of the Ants Nearby Treasure Search (ANTS) problem.
//!
//! `k` non-communicating agents leave a common source on `Z²` and search for
//! a treasure placed at Manhattan distance `D`. Before the search starts an
//! oracle may hand each agent a short advice string. This crate provides
//!
//! - [`grid`]: exact lattice geometry (balls, rings, the square spiral),
//! - [`protocols`]: advice oracles and agent programs, including the
//!   `O(log k)`-competitive guessing protocol driven by `⌊log log k⌋` advice,
//! - [`engine`]: per-agent analytic trial execution,
//! - [`experiments`]: competitive-ratio sweeps, advice audits and coverage
//!   diagnostics.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod protocols;
pub mod rng;

pub use error::{Error, Result};
pub use grid::Point;
