//! Rolls out hill-climbing agents of different step multipliers on the farm
//! and prints how close each gets to the final goal.
//!
//! `cargo run --example simulate_agent`

use goalsetting::agents::{run_episode, HillClimbAgent};
use goalsetting::io::default_farm;
use goalsetting::seed::rng_from_seed;
use goalsetting::smw::{distance_score, goal_achievement_score, resource_usage};

fn main() -> goalsetting::Result<()> {
    let farm = default_farm();
    let program = farm.final_only();
    println!("start: {:?}", farm.initial_state);
    println!(
        "initial distance to final goal: {:.2}",
        farm.final_goal.distance(&farm.initial_state)
    );

    for lambda in [0.2, 0.6, 1.0, 1.4, 1.8] {
        let noisy = HillClimbAgent::new(lambda, Default::default())?;
        for agent in [noisy.without_noise(), noisy] {
            let traj = run_episode(
                &farm.env,
                &agent,
                &program,
                &farm.initial_state,
                farm.horizon,
                &mut rng_from_seed(7),
            )?;
            println!(
                "λ={lambda:.1} noise={:<5} final distance {:7.2}  rounds in goal {:2}  resources {:7.1}  GAS {:.3}  DS {:.2}",
                agent.enable_noise,
                farm.final_goal.distance(traj.last_state()),
                traj.rounds_achieved(&farm.final_goal),
                resource_usage(&traj),
                goal_achievement_score(&traj, &farm.final_goal, &farm.weights),
                distance_score(&traj, &farm.final_goal, &farm.weights),
            );
        }
    }
    Ok(())
}
