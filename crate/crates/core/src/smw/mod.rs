//! Microworld semantics: linear dynamics, goals, trajectories and scoring.
//!
//! Everything here is pure. Randomness lives in [`crate::agents`] and
//! [`crate::optimize`].

mod env;
mod goal;
mod score;
mod trajectory;

pub use env::{Environment, Matrix};
pub use goal::{scale_to_tolerance, tolerance_to_scale, GoalProgram, GoalSpec};
pub use score::{distance_score, goal_achievement_score, resource_usage, ScoreWeights};
pub use trajectory::Trajectory;

pub(crate) use env::dot;

/// Single round of the dynamics, `A s + B a`.
pub fn step(env: &Environment, s: &[f64], a: &[f64]) -> crate::Result<Vec<f64>> {
    env.step(s, a)
}

/// Scale-weighted distance from `s` to `goal` over the goal's dimensions.
pub fn weighted_distance(s: &[f64], goal: &GoalSpec) -> f64 {
    goal.distance(s)
}

pub fn is_achieved(s: &[f64], goal: &GoalSpec) -> bool {
    goal.is_achieved(s)
}
