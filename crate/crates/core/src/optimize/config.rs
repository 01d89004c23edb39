use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cross-entropy search settings for one pair of state variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CEConfig {
    pub iterations: usize,
    pub population_size: usize,
    pub elite_fraction: f64,
    /// Rollouts per agent when scoring a candidate during search (η).
    pub rollouts_per_candidate: usize,
    /// Rollouts per agent when re-scoring the best candidate of a pair.
    pub final_reeval_rollouts: usize,
    /// Initial target mean; `None` starts at the final goal's targets.
    pub init_target_mean: Option<[f64; 2]>,
    pub init_target_std: [f64; 2],
    pub init_logscale_mean: [f64; 2],
    pub init_logscale_std: [f64; 2],
    pub min_std: f64,
    /// Achievement threshold of every candidate subgoal (δ_ε).
    pub subgoal_threshold: f64,
}

impl Default for CEConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            population_size: 1000,
            elite_fraction: 0.2,
            rollouts_per_candidate: 1,
            final_reeval_rollouts: 100,
            init_target_mean: None,
            init_target_std: [20.0, 20.0],
            init_logscale_mean: [0.5f64.ln(), 0.5f64.ln()],
            init_logscale_std: [1.5, 1.5],
            min_std: 1e-3,
            subgoal_threshold: 1.0,
        }
    }
}

impl CEConfig {
    pub fn elite_count(&self) -> usize {
        (self.elite_fraction * self.population_size as f64).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("iterations", self.iterations),
            ("population_size", self.population_size),
            ("rollouts_per_candidate", self.rollouts_per_candidate),
            ("final_reeval_rollouts", self.final_reeval_rollouts),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::field(name, "must be positive"));
            }
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::field("elite_fraction", "must lie in (0, 1)"));
        }
        if self.elite_count() < 2 {
            return Err(Error::field(
                "elite_fraction",
                format!("yields {} elites; at least 2 are needed", self.elite_count()),
            ));
        }
        let stds = self.init_target_std.iter().chain(&self.init_logscale_std);
        if stds.clone().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::field("init_*_std", "must be positive"));
        }
        if !(self.min_std > 0.0 && self.min_std.is_finite()) {
            return Err(Error::field("min_std", "must be positive"));
        }
        if !(self.subgoal_threshold > 0.0 && self.subgoal_threshold.is_finite()) {
            return Err(Error::field("subgoal_threshold", "must be positive"));
        }
        Ok(())
    }
}
