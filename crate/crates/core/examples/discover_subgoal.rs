//! Searches every pair of farm variables for the subgoal that most improves
//! the agent population's goal-achievement score.
//!
//! The default settings take a while in a debug build; this example uses a
//! reduced search. `cargo run --release --example discover_subgoal -- full`
//! runs the default one.

use goalsetting::io::default_farm;
use goalsetting::optimize::{discover_subgoal, CEConfig};

fn main() -> goalsetting::Result<()> {
    let farm = default_farm();
    let full = std::env::args().nth(1).as_deref() == Some("full");
    let config = if full {
        CEConfig::default()
    } else {
        CEConfig {
            iterations: 4,
            population_size: 150,
            final_reeval_rollouts: 20,
            ..Default::default()
        }
    };
    let report = discover_subgoal(&farm.context(), &config, 0)?;

    for p in &report.per_pair {
        let names = [&report.state_names[p.pair[0]], &report.state_names[p.pair[1]]];
        let tol = p.best.tolerances();
        println!(
            "{:>12}/{:<12} targets ({:6.2}, {:6.2}) ±({:5.2}, {:5.2})  score {:.3}  elite trace {:.3} -> {:.3}",
            names[0],
            names[1],
            p.best.targets[0],
            p.best.targets[1],
            tol[0],
            tol[1],
            p.final_score,
            p.elite_mean_trace[0],
            p.elite_mean_trace.last().unwrap(),
        );
    }
    let [a, b] = report.winner_names();
    println!(
        "winner: {a} = {:.2}, {b} = {:.2}, expected GAS {:.3}",
        report.winner.targets[0], report.winner.targets[1], report.winner_score
    );
    Ok(())
}
