use serde::{Deserialize, Serialize};

use super::goal::GoalSpec;
use super::trajectory::Trajectory;

/// Weights of the goal-achievement score and the distance score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreWeights {
    /// Starting endowment.
    pub w1: f64,
    /// Reward per round in which the final goal holds.
    pub w2: f64,
    /// Cost per unit of resource (L1 norm of the action).
    pub w3: f64,
    /// Resource penalty inside the distance score.
    pub c: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            w1: 0.2,
            w2: 0.3,
            w3: 0.005,
            c: 0.01,
        }
    }
}

impl ScoreWeights {
    /// `max(0, w1 + w2·x − w3·y)`.
    pub fn gas(&self, rounds_achieved: usize, resources: f64) -> f64 {
        (self.w1 + self.w2 * rounds_achieved as f64 - self.w3 * resources).max(0.0)
    }
}

/// Total resources spent: the sum of the L1 norms of every action.
pub fn resource_usage(traj: &Trajectory) -> f64 {
    traj.actions
        .iter()
        .map(|a| a.iter().map(|v| v.abs()).sum::<f64>())
        .sum()
}

/// Goal-achievement score. Achievement is counted against the final goal in
/// every round, whichever subgoal was active.
pub fn goal_achievement_score(traj: &Trajectory, final_goal: &GoalSpec, w: &ScoreWeights) -> f64 {
    w.gas(traj.rounds_achieved(final_goal), resource_usage(traj))
}

/// Unweighted terminal distance to the final targets combined with an L2
/// resource penalty. Lower is better.
pub fn distance_score(traj: &Trajectory, final_goal: &GoalSpec, w: &ScoreWeights) -> f64 {
    let s_t = traj.last_state();
    let terminal: f64 = final_goal
        .dims()
        .iter()
        .zip(final_goal.targets())
        .map(|(&d, t)| (s_t[d] - t).powi(2))
        .sum();
    let effort: f64 = traj.actions.iter().map(|a| a.iter().map(|v| v * v).sum::<f64>()).sum();
    (terminal + w.c * effort).sqrt()
}
