use serde::{Deserialize, Serialize};

use super::hill_climb::action_from_drift;
use super::noise::NoiseParams;
use crate::error::{Error, Result};
use crate::smw::{Environment, GoalSpec};

/// A bounded goal-pursuit agent that plans one round ahead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillClimbAgent {
    /// λ, multiplies the optimal step length.
    pub step_multiplier: f64,
    pub noise: NoiseParams,
    pub enable_noise: bool,
}

impl HillClimbAgent {
    pub fn new(step_multiplier: f64, noise: NoiseParams) -> Result<Self> {
        if !(step_multiplier > 0.0 && step_multiplier.is_finite()) {
            return Err(Error::contract(format!(
                "step multiplier must be positive, got {step_multiplier}"
            )));
        }
        noise.validate()?;
        Ok(Self {
            step_multiplier,
            noise,
            enable_noise: true,
        })
    }

    pub fn noiseless(step_multiplier: f64) -> Result<Self> {
        Ok(Self::new(step_multiplier, NoiseParams::default())?.without_noise())
    }

    pub fn without_noise(mut self) -> Self {
        self.enable_noise = false;
        self
    }

    pub fn with_noise_enabled(mut self, enabled: bool) -> Self {
        self.enable_noise = enabled;
        self
    }
}

/// `λ · t* · u` with `u` the normalised negative gradient; the zero action
/// when the drift already lands on the goal.
pub fn ideal_action(env: &Environment, s: &[f64], goal: &GoalSpec, agent: &HillClimbAgent) -> Vec<f64> {
    action_from_drift(env, &env.drift(s), goal, agent.step_multiplier)
}
