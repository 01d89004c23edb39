//! Batch evaluation of goal programs and the statistics used to compare
//! conditions.

mod batch;
mod compare;
mod stats;

pub use batch::{run_batch, run_batch_with_trajectories, BatchResult, BatchRow};
pub use compare::{compare_conditions, compare_outcomes, Comparison, ComparisonReport, Outcomes};
pub use stats::{
    mann_whitney_u, mann_whitney_u_with, normal_cdf, two_proportion_z, Alternative, PValueMethod, TestKind, TestResult,
    EXACT_THRESHOLD,
};
