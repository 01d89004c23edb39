//! Simulates the population with and without a subgoal and compares the
//! outcomes with rank and proportion tests.
//!
//! `cargo run --release --example compare_conditions`

use goalsetting::harness::{compare_conditions, run_batch};
use goalsetting::io::default_farm;
use goalsetting::smw::GoalSpec;

fn main() -> goalsetting::Result<()> {
    let farm = default_farm();
    let ctx = farm.context();
    let subgoal = GoalSpec::from_tolerances(vec![0, 1], vec![0.0, 4.0], &[2.03, 6.45], 1.0)?;

    let with = run_batch(&ctx, &farm.program_with(vec![subgoal]), 20, 1)?;
    let without = run_batch(&ctx, &farm.final_only(), 20, 1)?;
    let report = compare_conditions(&with, &without)?;
    print!("{}", report.to_table());

    let retired: Vec<usize> = with.rows.iter().filter_map(|r| r.subgoal_achieved_round).collect();
    println!(
        "{} of {} episodes reached the subgoal, median round {}",
        retired.len(),
        with.rows.len(),
        {
            let mut r = retired.clone();
            r.sort_unstable();
            r.get(r.len() / 2).copied().unwrap_or(0)
        }
    );
    Ok(())
}
