//! Subgoal discovery: cross-entropy optimisation of a two-dimensional
//! subgoal's targets and scales, scored by simulated agent populations.

mod candidate;
mod ce;
mod config;
mod discover;
mod evaluate;

pub use candidate::SubgoalCandidate;
pub use ce::{ce_optimize_pair, CEDistribution, PairSearch};
pub use config::CEConfig;
pub use discover::{discover_subgoal, enumerate_pairs, OptimizationReport, REPORT_SCHEMA_VERSION};
pub use evaluate::{estimate_performance, CandidateEvaluator, SimulationContext};
