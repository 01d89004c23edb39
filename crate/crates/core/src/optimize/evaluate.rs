use crate::agents::{episode_gas, AgentPopulation};
use crate::seed::{derive_seed, rng_from_seed};
use crate::smw::{Environment, GoalProgram, GoalSpec, ScoreWeights};

use super::candidate::SubgoalCandidate;

/// Scores a candidate subgoal. Higher is better. Implementations must be
/// deterministic in `(candidate, rollouts, seed)`.
pub trait CandidateEvaluator: Sync {
    fn score(&self, candidate: &SubgoalCandidate, rollouts: usize, seed: u64) -> f64;
}

impl<F> CandidateEvaluator for F
where
    F: Fn(&SubgoalCandidate, usize, u64) -> f64 + Sync,
{
    fn score(&self, candidate: &SubgoalCandidate, rollouts: usize, seed: u64) -> f64 {
        self(candidate, rollouts, seed)
    }
}

/// Everything needed to roll out the agent population against a program.
#[derive(Debug, Clone)]
pub struct SimulationContext {
    pub env: Environment,
    pub final_goal: GoalSpec,
    pub initial_state: Vec<f64>,
    pub horizon: usize,
    pub population: AgentPopulation,
    pub weights: ScoreWeights,
}

impl SimulationContext {
    /// Mean goal-achievement score over every agent and `rollouts` noisy
    /// episodes per agent, each seeded from `(seed, agent, rollout)`.
    pub fn mean_gas(&self, program: &GoalProgram, rollouts: usize, seed: u64) -> f64 {
        let mut total = 0.0;
        for (i, agent) in self.population.agents().iter().enumerate() {
            for r in 0..rollouts {
                let mut rng = rng_from_seed(derive_seed(seed, &[i as u64, r as u64]));
                total += episode_gas(
                    &self.env,
                    agent,
                    program,
                    &self.initial_state,
                    self.horizon,
                    &self.weights,
                    &mut rng,
                )
                .expect("simulation context was validated");
            }
        }
        total / (self.population.len() * rollouts) as f64
    }

    pub fn program_for(&self, candidate: &SubgoalCandidate) -> crate::Result<GoalProgram> {
        GoalProgram::new(
            vec![candidate.to_goal()?],
            self.final_goal.clone(),
            self.env.num_states(),
        )
    }

    pub fn validate(&self) -> crate::Result<()> {
        let program = GoalProgram::final_only(self.final_goal.clone(), self.env.num_states())?;
        let mut rng = rng_from_seed(0);
        crate::agents::run_episode(
            &self.env,
            &self.population.agents()[0],
            &program,
            &self.initial_state,
            self.horizon,
            &mut rng,
        )
        .map(|_| ())
    }
}

impl CandidateEvaluator for SimulationContext {
    fn score(&self, candidate: &SubgoalCandidate, rollouts: usize, seed: u64) -> f64 {
        let program = self.program_for(candidate).expect("sampled candidates are valid goals");
        self.mean_gas(&program, rollouts, seed)
    }
}

/// Monte-Carlo estimate of the population's expected goal-achievement score
/// when pursuing `candidate` before the final goal.
pub fn estimate_performance(candidate: &SubgoalCandidate, ctx: &SimulationContext, rollouts: usize, seed: u64) -> f64 {
    ctx.score(candidate, rollouts, seed)
}
