//! The rank-sum and two-proportion tests on small hand-made samples.
//!
//! `cargo run --example statistics`

use goalsetting::harness::{mann_whitney_u, mann_whitney_u_with, two_proportion_z, Alternative, PValueMethod};

fn main() -> goalsetting::Result<()> {
    let a = [1.0, 2.0, 3.0];
    let b = [4.0, 5.0, 6.0];
    let r = mann_whitney_u(&a, &b, Alternative::TwoSided)?;
    println!("U = {}, p = {:.4} ({})", r.statistic, r.p_value, r.method);

    let with_ties = [2.0, 2.0, 3.0, 5.0, 5.0, 8.0, 9.0, 9.0, 9.0, 10.0];
    let other = [1.0, 2.0, 2.0, 4.0, 4.0, 5.0, 6.0, 7.0, 7.0, 8.0];
    for method in [PValueMethod::Exact, PValueMethod::Normal] {
        let r = mann_whitney_u_with(&with_ties, &other, Alternative::Greater, method)?;
        println!("greater, {:<6}: U = {}, p = {:.4}", r.method, r.statistic, r.p_value);
    }

    let z = two_proportion_z(65, 150, 48, 152, Alternative::TwoSided)?;
    println!("65/150 vs 48/152: z = {:.3}, p = {:.4}", z.statistic, z.p_value);
    Ok(())
}
