//! The hill-climbing goal-pursuit agent and populations of such agents.

mod agent;
mod episode;
mod hill_climb;
mod noise;
mod population;

pub use agent::{ideal_action, HillClimbAgent};
pub use episode::{episode_gas, run_episode, subgoal_retired_round};
pub use hill_climb::{goal_gradient, optimal_step_size, ZeroResidual, INERT_DIRECTION_EPS, ZERO_RESIDUAL_EPS};
pub use noise::{perturb_action, rotate_action, sample_von_mises, DistanceNoiseModel, NoiseParams};
pub use population::{
    make_population, make_population_with, AgentPopulation, DEFAULT_LAMBDA_RANGE, DEFAULT_POPULATION_SIZE,
};
