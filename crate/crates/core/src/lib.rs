//! Subgoal discovery for boundedly rational agents in linear microworlds.
//!
//! The crate simulates one-step-lookahead (hill-climbing) agents steering a
//! linear dynamical system `s' = A s + B a` toward a goal, searches for the
//! two-dimensional subgoal that maximises a population's expected
//! goal-achievement score with the cross-entropy method, and evaluates the
//! result with batch rollouts and rank-based statistics. A small HTTP
//! session service lets people play the same task round by round.
//!
//! Module map:
//!
//! - [`smw`]: dynamics, goals, trajectories, scores
//! - [`agents`]: the hill-climbing agent, action noise, populations
//! - [`optimize`]: cross-entropy subgoal search
//! - [`harness`]: batch evaluation and statistical tests
//! - [`io`]: JSON file formats
//! - [`service`]: interactive sessions and their HTTP API
//! - [`cli`]: the `smw` command line

pub mod agents;
pub mod cli;
mod error;
pub mod harness;
pub mod io;
pub mod optimize;
pub mod seed;
pub mod service;
pub mod smw;

pub use error::{Error, Result};
