use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::goal::GoalSpec;
use crate::error::{Error, Result};

/// States `s_0..s_T` interleaved with actions `a_0..a_{T-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    /// One flag per post-action state `s_1..s_T`.
    pub final_goal_achieved: Vec<bool>,
    /// Index into the goal program pursued at each round.
    pub active_goal_index: Vec<usize>,
}

impl Trajectory {
    pub fn start(s0: Vec<f64>) -> Self {
        Self {
            states: vec![s0],
            actions: Vec::new(),
            final_goal_achieved: Vec::new(),
            active_goal_index: Vec::new(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.actions.len()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory always holds s_0")
    }

    pub(crate) fn push(&mut self, action: Vec<f64>, next: Vec<f64>, final_achieved: bool, active: usize) {
        self.actions.push(action);
        self.states.push(next);
        self.final_goal_achieved.push(final_achieved);
        self.active_goal_index.push(active);
    }

    /// Number of rounds `t ∈ 1..=T` in which `goal` holds at `s_t`.
    pub fn rounds_achieved(&self, goal: &GoalSpec) -> usize {
        self.states[1..].iter().filter(|s| goal.is_achieved(s)).count()
    }

    /// Replays every action through `env` and checks the stored states match
    /// bit for bit, along with the per-round bookkeeping lengths.
    pub fn verify(&self, env: &Environment, final_goal: &GoalSpec) -> Result<()> {
        let t = self.actions.len();
        if self.states.len() != t + 1 || self.final_goal_achieved.len() != t || self.active_goal_index.len() != t {
            return Err(Error::contract("trajectory field lengths are inconsistent"));
        }
        env.check_state(&self.states[0])?;
        for (i, a) in self.actions.iter().enumerate() {
            let next = env.step(&self.states[i], a)?;
            let same = next
                .iter()
                .zip(&self.states[i + 1])
                .all(|(x, y)| x.to_bits() == y.to_bits());
            if !same {
                return Err(Error::contract(format!("state {} does not replay", i + 1)));
            }
            if final_goal.is_achieved(&next) != self.final_goal_achieved[i] {
                return Err(Error::contract(format!("achievement flag {i} is wrong")));
            }
        }
        Ok(())
    }
}
