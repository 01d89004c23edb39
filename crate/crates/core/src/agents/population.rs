use serde::{Deserialize, Serialize};

use super::agent::HillClimbAgent;
use super::noise::NoiseParams;
use crate::error::{Error, Result};

/// Agents with different step multipliers, standing in for uncertainty about
/// the capacities of the person pursuing the goal. Sorted by multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPopulation {
    agents: Vec<HillClimbAgent>,
}

pub const DEFAULT_POPULATION_SIZE: usize = 30;
pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (0.2, 1.8);

impl AgentPopulation {
    pub fn from_agents(mut agents: Vec<HillClimbAgent>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::contract("agent population must not be empty"));
        }
        agents.sort_by(|a, b| a.step_multiplier.total_cmp(&b.step_multiplier));
        Ok(Self { agents })
    }

    /// `count` multipliers equally spaced over `[lo, hi]`, both ends included.
    pub fn evenly_spaced(lo: f64, hi: f64, count: usize, noise: NoiseParams) -> Result<Self> {
        if count == 0 {
            return Err(Error::contract("population size must be positive"));
        }
        let lambdas: Vec<f64> = if count == 1 {
            vec![(lo + hi) / 2.0]
        } else {
            (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect()
        };
        make_population_with(&lambdas, noise)
    }

    pub fn agents(&self) -> &[HillClimbAgent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.step_multiplier).collect()
    }

    pub fn with_noise_enabled(&self, enabled: bool) -> Self {
        Self {
            agents: self.agents.iter().map(|a| a.with_noise_enabled(enabled)).collect(),
        }
    }
}

impl Default for AgentPopulation {
    fn default() -> Self {
        let (lo, hi) = DEFAULT_LAMBDA_RANGE;
        Self::evenly_spaced(lo, hi, DEFAULT_POPULATION_SIZE, NoiseParams::default())
            .expect("default population is valid")
    }
}

/// One noisy agent per multiplier with shared default noise parameters.
pub fn make_population(lambdas: &[f64]) -> Result<AgentPopulation> {
    make_population_with(lambdas, NoiseParams::default())
}

pub fn make_population_with(lambdas: &[f64], noise: NoiseParams) -> Result<AgentPopulation> {
    let agents = lambdas
        .iter()
        .map(|&l| HillClimbAgent::new(l, noise))
        .collect::<Result<Vec<_>>>()?;
    AgentPopulation::from_agents(agents)
}
