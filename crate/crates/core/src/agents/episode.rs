use rand::Rng;

use super::agent::HillClimbAgent;
use super::hill_climb::action_into;
use super::noise::perturb_in_place;
use crate::error::{Error, Result};
use crate::smw::dot;
use crate::smw::{Environment, GoalProgram, ScoreWeights, Trajectory};

/// Per-round callback payload.
pub(crate) struct Round<'a> {
    pub action: &'a [f64],
    pub next: &'a [f64],
    pub active: usize,
}

fn check_inputs(env: &Environment, program: &GoalProgram, s0: &[f64], horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::contract("horizon must be at least one round"));
    }
    env.check_state(s0)?;
    if !program.final_goal().covers_all(env.num_states()) {
        return Err(Error::contract("goal program does not match the environment"));
    }
    for g in program.subgoals() {
        g.validate_for(env.num_states())?;
    }
    Ok(())
}

/// Core rollout loop. Subgoals already satisfied at `s0` are retired before
/// the first action; a retired subgoal stays retired.
pub(crate) fn simulate<R: Rng + ?Sized>(
    env: &Environment,
    agent: &HillClimbAgent,
    program: &GoalProgram,
    s0: &[f64],
    horizon: usize,
    rng: &mut R,
    mut on_round: impl FnMut(Round<'_>),
) {
    let (n, m) = (env.num_states(), env.num_actions());
    let (a_mat, b_mat) = (env.transition(), env.input());
    let mut s = s0.to_vec();
    let mut drift = vec![0.0; n];
    let mut action = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut active = program.advance(0, &s);
    for _ in 0..horizon {
        for (i, d) in drift.iter_mut().enumerate() {
            *d = dot(a_mat.row(i), &s);
        }
        action_into(env, &drift, program.goal(active), agent.step_multiplier, &mut action);
        if agent.enable_noise {
            perturb_in_place(&mut action, &agent.noise, rng, &mut scratch);
        }
        for (i, si) in s.iter_mut().enumerate() {
            *si = drift[i] + dot(b_mat.row(i), &action);
        }
        on_round(Round {
            action: &action,
            next: &s,
            active,
        });
        active = program.advance(active, &s);
    }
}

/// Rolls out `horizon` rounds of `agent` pursuing `program` from `s0`.
pub fn run_episode<R: Rng + ?Sized>(
    env: &Environment,
    agent: &HillClimbAgent,
    program: &GoalProgram,
    s0: &[f64],
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    check_inputs(env, program, s0, horizon)?;
    let mut traj = Trajectory::start(s0.to_vec());
    let fin = program.final_goal();
    simulate(env, agent, program, s0, horizon, rng, |r| {
        let achieved = fin.is_achieved(r.next);
        traj.push(r.action.to_vec(), r.next.to_vec(), achieved, r.active);
    });
    debug_assert_eq!(traj.rounds(), horizon);
    Ok(traj)
}

/// Goal-achievement score of one rollout without materialising the
/// trajectory. Equal to scoring the output of [`run_episode`].
pub fn episode_gas<R: Rng + ?Sized>(
    env: &Environment,
    agent: &HillClimbAgent,
    program: &GoalProgram,
    s0: &[f64],
    horizon: usize,
    weights: &ScoreWeights,
    rng: &mut R,
) -> Result<f64> {
    check_inputs(env, program, s0, horizon)?;
    let fin = program.final_goal();
    let mut x = 0;
    let mut y = 0.0;
    simulate(env, agent, program, s0, horizon, rng, |r| {
        if fin.is_achieved(r.next) {
            x += 1;
        }
        y += r.action.iter().map(|v| v.abs()).sum::<f64>();
    });
    Ok(weights.gas(x, y))
}

/// Round (1-based state index) at which subgoal `index` was retired: 0 when
/// it was already satisfied at `s_0`, `None` if it never was.
pub fn subgoal_retired_round(traj: &Trajectory, program: &GoalProgram, index: usize) -> Option<usize> {
    let mut active = 0;
    traj.states.iter().enumerate().find_map(|(t, s)| {
        active = program.advance(active, s);
        (active > index).then_some(t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::NoiseParams;
    use crate::seed::rng_from_seed;
    use crate::smw::{goal_achievement_score, GoalSpec, Matrix};

    fn scalar_env() -> Environment {
        Environment::from_matrices(Matrix::identity(1), Matrix::identity(1)).unwrap()
    }

    fn two_state_env() -> Environment {
        let a = Matrix::from_rows(&[vec![1.5, 0.0], vec![0.2, 1.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0, 0.3], vec![-0.4, 1.0]]).unwrap();
        Environment::from_matrices(a, b).unwrap()
    }

    #[test]
    fn final_goal_only_keeps_one_index() {
        let env = two_state_env();
        let fin = GoalSpec::full(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        let p = GoalProgram::final_only(fin, 2).unwrap();
        let agent = HillClimbAgent::new(0.7, NoiseParams::default()).unwrap();
        let t = run_episode(&env, &agent, &p, &[10.0, -4.0], 8, &mut rng_from_seed(1)).unwrap();
        assert_eq!(t.rounds(), 8);
        assert_eq!(t.states.len(), 9);
        assert!(t.active_goal_index.iter().all(|&i| i == 0));
    }

    #[test]
    fn noiseless_scalar_agent_reaches_and_holds_goal() {
        let env = scalar_env();
        let fin = GoalSpec::full(vec![0.0], vec![1.0], 0.5).unwrap();
        let p = GoalProgram::final_only(fin, 1).unwrap();
        let agent = HillClimbAgent::noiseless(1.0).unwrap();
        let t = run_episode(&env, &agent, &p, &[2.0], 3, &mut rng_from_seed(0)).unwrap();
        assert_eq!(t.states, vec![vec![2.0], vec![0.0], vec![0.0], vec![0.0]]);
        assert_eq!(t.actions, vec![vec![-2.0], vec![0.0], vec![0.0]]);
        assert_eq!(t.final_goal_achieved, vec![true; 3]);
    }

    #[test]
    fn seeded_replay_is_bit_identical() {
        let env = two_state_env();
        let fin = GoalSpec::full(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        let sub = GoalSpec::new(vec![0], vec![0.0], vec![1.0], 0.5).unwrap();
        let p = GoalProgram::new(vec![sub], fin, 2).unwrap();
        let agent = HillClimbAgent::new(1.2, NoiseParams::default()).unwrap();
        let a = run_episode(&env, &agent, &p, &[10.0, -4.0], 20, &mut rng_from_seed(42)).unwrap();
        let b = run_episode(&env, &agent, &p, &[10.0, -4.0], 20, &mut rng_from_seed(42)).unwrap();
        assert_eq!(a, b);
        let c = run_episode(&env, &agent, &p, &[10.0, -4.0], 20, &mut rng_from_seed(43)).unwrap();
        assert_ne!(a, c);
        a.verify(&env, p.final_goal()).unwrap();
    }

    #[test]
    fn noiseless_ignores_seed() {
        let env = two_state_env();
        let fin = GoalSpec::full(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        let p = GoalProgram::final_only(fin, 2).unwrap();
        let agent = HillClimbAgent::noiseless(0.8).unwrap();
        let a = run_episode(&env, &agent, &p, &[3.0, 3.0], 10, &mut rng_from_seed(1)).unwrap();
        let b = run_episode(&env, &agent, &p, &[3.0, 3.0], 10, &mut rng_from_seed(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subgoal_retires_and_stays_retired() {
        let env = scalar_env();
        let fin = GoalSpec::full(vec![0.0], vec![1.0], 0.5).unwrap();
        let sub = GoalSpec::new(vec![0], vec![5.0], vec![1.0], 0.5).unwrap();
        let p = GoalProgram::new(vec![sub], fin, 1).unwrap();
        let agent = HillClimbAgent::noiseless(1.0).unwrap();
        let t = run_episode(&env, &agent, &p, &[10.0], 4, &mut rng_from_seed(0)).unwrap();
        assert_eq!(t.states, vec![vec![10.0], vec![5.0], vec![0.0], vec![0.0], vec![0.0]]);
        assert_eq!(t.active_goal_index, vec![0, 1, 1, 1]);
        assert_eq!(subgoal_retired_round(&t, &p, 0), Some(1));
    }

    #[test]
    fn subgoal_satisfied_at_start_is_vacuous() {
        let env = scalar_env();
        let fin = GoalSpec::full(vec![0.0], vec![1.0], 0.5).unwrap();
        let sub = GoalSpec::new(vec![0], vec![10.0], vec![1.0], 100.0).unwrap();
        let with = GoalProgram::new(vec![sub], fin.clone(), 1).unwrap();
        let without = GoalProgram::final_only(fin, 1).unwrap();
        let agent = HillClimbAgent::noiseless(0.6).unwrap();
        let a = run_episode(&env, &agent, &with, &[10.0], 5, &mut rng_from_seed(0)).unwrap();
        let b = run_episode(&env, &agent, &without, &[10.0], 5, &mut rng_from_seed(0)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.active_goal_index, vec![1; 5]);
        assert_eq!(subgoal_retired_round(&a, &with, 0), Some(0));
    }

    #[test]
    fn gas_shortcut_matches_trajectory_scoring() {
        let env = two_state_env();
        let fin = GoalSpec::full(vec![0.0; 2], vec![1.0; 2], 3.0).unwrap();
        let sub = GoalSpec::new(vec![0], vec![1.0], vec![1.0], 0.5).unwrap();
        let p = GoalProgram::new(vec![sub], fin, 2).unwrap();
        let agent = HillClimbAgent::new(0.9, NoiseParams::default()).unwrap();
        let w = ScoreWeights::default();
        for seed in 0..10 {
            let t = run_episode(&env, &agent, &p, &[6.0, 2.0], 15, &mut rng_from_seed(seed)).unwrap();
            let fast = episode_gas(&env, &agent, &p, &[6.0, 2.0], 15, &w, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(fast, goal_achievement_score(&t, p.final_goal(), &w));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let env = scalar_env();
        let fin = GoalSpec::full(vec![0.0], vec![1.0], 0.5).unwrap();
        let p = GoalProgram::final_only(fin, 1).unwrap();
        let agent = HillClimbAgent::noiseless(1.0).unwrap();
        assert!(run_episode(&env, &agent, &p, &[1.0], 0, &mut rng_from_seed(0)).is_err());
        assert!(run_episode(&env, &agent, &p, &[1.0, 2.0], 3, &mut rng_from_seed(0)).is_err());
    }
}
