//! Converts between goal scales and the per-dimension tolerances shown to
//! players.
//!
//! `cargo run --example tolerances`

use goalsetting::smw::{scale_to_tolerance, tolerance_to_scale, GoalSpec};

fn main() -> goalsetting::Result<()> {
    let scale = [0.121, 0.012];
    let tol = scale_to_tolerance(&scale, 1.0);
    println!(
        "scales {scale:?} with threshold 1 -> tolerances ({:.2}, {:.2})",
        tol[0], tol[1]
    );
    println!("displayed as ±{} and ±{}", tol[0].round(), tol[1].round());

    let back = tolerance_to_scale(&tol, 1.0)?;
    println!("and back: ({:.4}, {:.4})", back[0], back[1]);

    // The corners of the tolerance box sit exactly on the threshold, and
    // achievement is inclusive.
    let goal = GoalSpec::from_tolerances(vec![0, 1], vec![0.0, 4.0], &tol, 1.0)?;
    for s in [
        [0.0, 4.0],
        [tol[0], 4.0],
        [tol[0], 4.0 + tol[1]],
        [1.1 * tol[0], 4.0 + tol[1]],
    ] {
        println!(
            "state {s:?}: distance {:.3}, achieved {}",
            goal.distance(&s),
            goal.is_achieved(&s)
        );
    }
    Ok(())
}
