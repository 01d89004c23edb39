use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidate::SubgoalCandidate;
use super::ce::{ce_optimize_pair, PairSearch};
use super::config::CEConfig;
use super::evaluate::{CandidateEvaluator, SimulationContext};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Every unordered pair `(i, j)` with `i < j < n`, in lexicographic order.
pub fn enumerate_pairs(n: usize) -> Vec<[usize; 2]> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| [i, j])).collect()
}

/// Result of a full subgoal search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub schema_version: u32,
    pub seed: u64,
    pub state_names: Vec<String>,
    pub config: CEConfig,
    pub per_pair: Vec<PairSearch>,
    pub winner: SubgoalCandidate,
    pub winner_score: f64,
}

impl OptimizationReport {
    pub fn pair(&self, pair: [usize; 2]) -> Option<&PairSearch> {
        self.per_pair.iter().find(|p| p.pair == pair)
    }

    pub fn winner_names(&self) -> [&str; 2] {
        self.winner.dims.map(|d| self.state_names[d].as_str())
    }
}

/// Runs a cross-entropy search for every pair of state variables, each with
/// a sub-seed derived from `seed`, and keeps the pair whose best candidate
/// re-scores highest. Ties go to the lexicographically smallest pair.
pub fn discover_subgoal(ctx: &SimulationContext, config: &CEConfig, seed: u64) -> Result<OptimizationReport> {
    ctx.validate()?;
    let pairs = enumerate_pairs(ctx.env.num_states());
    if pairs.is_empty() {
        return Err(Error::contract("subgoal search needs at least two state variables"));
    }
    let targets = ctx.final_goal.targets();
    let per_pair = search_pairs(&pairs, config, ctx, seed, |p| [targets[p[0]], targets[p[1]]])?;
    let winner = pick_winner(&per_pair);
    Ok(OptimizationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        state_names: ctx.env.state_names().to_vec(),
        config: config.clone(),
        winner: winner.best,
        winner_score: winner.final_score,
        per_pair,
    })
}

pub(crate) fn search_pairs<E: CandidateEvaluator + ?Sized>(
    pairs: &[[usize; 2]],
    config: &CEConfig,
    evaluator: &E,
    seed: u64,
    default_targets: impl Fn([usize; 2]) -> [f64; 2] + Sync,
) -> Result<Vec<PairSearch>> {
    pairs
        .par_iter()
        .map(|&p| {
            let sub = derive_seed(seed, &[p[0] as u64, p[1] as u64]);
            ce_optimize_pair(p, config, default_targets(p), evaluator, sub)
        })
        .collect()
}

fn pick_winner(per_pair: &[PairSearch]) -> &PairSearch {
    per_pair
        .iter()
        .reduce(|best, p| if p.final_score > best.final_score { p } else { best })
        .expect("non-empty")
}
