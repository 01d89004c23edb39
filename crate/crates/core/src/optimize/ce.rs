//! Cross-entropy search over one pair of state variables.
//!
//! The sampling distribution is an independent Gaussian over
//! `(target_1, target_2, ln scale_1, ln scale_2)`; scales are recovered by
//! exponentiation so they are always positive.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidate::SubgoalCandidate;
use super::config::CEConfig;
use super::evaluate::CandidateEvaluator;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEDistribution {
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

impl CEDistribution {
    pub fn initial(config: &CEConfig, default_targets: [f64; 2]) -> Self {
        let t = config.init_target_mean.unwrap_or(default_targets);
        let m = config.init_logscale_mean;
        let ts = config.init_target_std;
        let ls = config.init_logscale_std;
        Self {
            mean: [t[0], t[1], m[0], m[1]],
            std: [ts[0], ts[1], ls[0], ls[1]].map(|s| s.max(config.min_std)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dims: [usize; 2], threshold: f64, rng: &mut R) -> SubgoalCandidate {
        let mut x = [0.0; 4];
        for (k, v) in x.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v = self.mean[k] + self.std[k] * z;
        }
        SubgoalCandidate {
            dims,
            targets: [x[0], x[1]],
            scale: [clamp_log(x[2]).exp(), clamp_log(x[3]).exp()],
            threshold,
        }
    }

    /// Maximum-likelihood refit to the elites, with every std floored at
    /// `min_std`.
    pub fn refit(elites: &[SubgoalCandidate], min_std: f64) -> Self {
        let coords: Vec<[f64; 4]> = elites.iter().map(encode).collect();
        let n = coords.len() as f64;
        let mut mean = [0.0; 4];
        for c in &coords {
            for k in 0..4 {
                mean[k] += c[k] / n;
            }
        }
        let mut var = [0.0; 4];
        for c in &coords {
            for k in 0..4 {
                var[k] += (c[k] - mean[k]).powi(2) / n;
            }
        }
        Self {
            mean,
            std: var.map(|v| v.sqrt().max(min_std)),
        }
    }
}

/// Keeps `exp` finite and nonzero.
fn clamp_log(v: f64) -> f64 {
    v.clamp(-300.0, 300.0)
}

fn encode(c: &SubgoalCandidate) -> [f64; 4] {
    [c.targets[0], c.targets[1], c.scale[0].ln(), c.scale[1].ln()]
}

/// Outcome of searching one pair of state variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSearch {
    pub pair: [usize; 2],
    /// Best candidate observed during search.
    pub best: SubgoalCandidate,
    /// Its (noisy) score during search.
    pub best_search_score: f64,
    /// Mean elite score per iteration.
    pub elite_mean_trace: Vec<f64>,
    /// Score of `best` re-estimated with `final_reeval_rollouts`.
    pub final_score: f64,
    pub final_distribution: CEDistribution,
}

/// Indices sorted by score, highest first; equal scores keep sampling order.
pub(crate) fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Runs the cross-entropy procedure for `pair` and re-scores the best
/// candidate ever sampled.
///
/// Candidate evaluations within an iteration run in parallel, each with its
/// own derived seed, so the result does not depend on scheduling.
pub fn ce_optimize_pair<E: CandidateEvaluator + ?Sized>(
    pair: [usize; 2],
    config: &CEConfig,
    default_targets: [f64; 2],
    evaluator: &E,
    seed: u64,
) -> crate::Result<PairSearch> {
    config.validate()?;
    if pair[0] >= pair[1] {
        return Err(crate::Error::contract("pair indices must be strictly increasing"));
    }
    let mut dist = CEDistribution::initial(config, default_targets);
    let elites_n = config.elite_count();
    let mut best: Option<(SubgoalCandidate, f64)> = None;
    let mut trace = Vec::with_capacity(config.iterations);

    for it in 0..config.iterations as u64 {
        let mut rng = rng_from_seed(derive_seed(seed, &[it, 0]));
        let candidates: Vec<SubgoalCandidate> = (0..config.population_size)
            .map(|_| dist.sample(pair, config.subgoal_threshold, &mut rng))
            .collect();
        let scores: Vec<f64> = candidates
            .par_iter()
            .enumerate()
            .map(|(i, c)| evaluator.score(c, config.rollouts_per_candidate, derive_seed(seed, &[it, 1, i as u64])))
            .collect();

        for (c, &s) in candidates.iter().zip(&scores) {
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((*c, s));
            }
        }
        let order = rank_desc(&scores);
        let elites: Vec<SubgoalCandidate> = order[..elites_n].iter().map(|&i| candidates[i]).collect();
        trace.push(order[..elites_n].iter().map(|&i| scores[i]).sum::<f64>() / elites_n as f64);
        dist = CEDistribution::refit(&elites, config.min_std);
    }

    let (best, best_search_score) = best.expect("at least one iteration ran");
    let final_score = evaluator.score(&best, config.final_reeval_rollouts, derive_seed(seed, &[u64::MAX]));
    Ok(PairSearch {
        pair,
        best,
        best_search_score,
        elite_mean_trace: trace,
        final_score,
        final_distribution: dist,
    })
}
