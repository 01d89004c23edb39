use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{run_episode, subgoal_retired_round};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::optimize::SimulationContext;
use crate::seed::{derive_seed, rng_from_seed};
use crate::smw::{distance_score, goal_achievement_score, resource_usage, GoalProgram, Trajectory};

/// Measurements from one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub agent: usize,
    pub lambda: f64,
    pub rollout: usize,
    pub seed: u64,
    pub gas: f64,
    pub ds: f64,
    pub resources: f64,
    /// Rounds in which the final goal held.
    pub rounds_achieved: usize,
    /// Round at which the first subgoal was retired (0 if already met at
    /// the start), `None` when there is no subgoal or it was never met.
    pub subgoal_achieved_round: Option<usize>,
}

/// One row per `(agent, rollout)`, agents in population order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub schema_version: u32,
    pub master_seed: u64,
    pub horizon: usize,
    pub rollouts_per_agent: usize,
    pub program: GoalProgram,
    pub rows: Vec<BatchRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<Trajectory>>,
}

impl BatchResult {
    pub fn gas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gas).collect()
    }

    pub fn ds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ds).collect()
    }

    pub fn resources(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.resources).collect()
    }

    pub fn mean_gas(&self) -> f64 {
        mean(&self.gas())
    }

    /// Rows with a strictly positive goal-achievement score.
    pub fn positive_gas_count(&self) -> usize {
        self.rows.iter().filter(|r| r.gas > 0.0).count()
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Rolls out every agent `rollouts` times against `program`. Row seeds are
/// `derive_seed(master_seed, [agent, rollout])`, the same streams that
/// [`SimulationContext::mean_gas`] uses, so the batch mean equals it.
pub fn run_batch(
    ctx: &SimulationContext,
    program: &GoalProgram,
    rollouts: usize,
    master_seed: u64,
) -> Result<BatchResult> {
    run_batch_inner(ctx, program, rollouts, master_seed, false)
}

/// As [`run_batch`], also keeping every trajectory for audit.
pub fn run_batch_with_trajectories(
    ctx: &SimulationContext,
    program: &GoalProgram,
    rollouts: usize,
    master_seed: u64,
) -> Result<BatchResult> {
    run_batch_inner(ctx, program, rollouts, master_seed, true)
}

fn run_batch_inner(
    ctx: &SimulationContext,
    program: &GoalProgram,
    rollouts: usize,
    master_seed: u64,
    keep: bool,
) -> Result<BatchResult> {
    if rollouts == 0 {
        return Err(Error::contract("rollouts must be at least 1"));
    }
    let agents = ctx.population.agents();
    let jobs: Vec<(usize, usize)> = (0..agents.len())
        .flat_map(|i| (0..rollouts).map(move |r| (i, r)))
        .collect();
    let results: Vec<(BatchRow, Trajectory)> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let seed = derive_seed(master_seed, &[i as u64, r as u64]);
            let agent = &agents[i];
            let traj = run_episode(
                &ctx.env,
                agent,
                program,
                &ctx.initial_state,
                ctx.horizon,
                &mut rng_from_seed(seed),
            )?;
            let fin = program.final_goal();
            let row = BatchRow {
                agent: i,
                lambda: agent.step_multiplier,
                rollout: r,
                seed,
                gas: goal_achievement_score(&traj, fin, &ctx.weights),
                ds: distance_score(&traj, fin, &ctx.weights),
                resources: resource_usage(&traj),
                rounds_achieved: traj.rounds_achieved(fin),
                subgoal_achieved_round: if program.subgoals().is_empty() {
                    None
                } else {
                    subgoal_retired_round(&traj, program, 0)
                },
            };
            Ok((row, traj))
        })
        .collect::<Result<_>>()?;
    let (rows, trajs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(BatchResult {
        schema_version: SCHEMA_VERSION,
        master_seed,
        horizon: ctx.horizon,
        rollouts_per_agent: rollouts,
        program: program.clone(),
        rows,
        trajectories: keep.then_some(trajs),
    })
}
