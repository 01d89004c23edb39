use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::batch::{mean, median, BatchResult};
use super::stats::{mann_whitney_u, two_proportion_z, Alternative, TestResult};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;

/// One measure compared across the two conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub measure: String,
    /// `mean`, `median` or `proportion`.
    pub summary: String,
    pub with_subgoal: f64,
    pub without_subgoal: f64,
    pub difference: f64,
    pub test: TestResult,
}

/// The four standard comparisons between a subgoal and a no-subgoal
/// condition. All tests are two-sided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub n_with_subgoal: usize,
    pub n_without_subgoal: usize,
    pub comparisons: Vec<Comparison>,
}

impl ComparisonReport {
    pub fn get(&self, measure: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.measure == measure)
    }

    /// Fixed-width text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n = {} (subgoal) vs {} (no subgoal)",
            self.n_with_subgoal, self.n_without_subgoal
        );
        let _ = writeln!(
            out,
            "{:<22} {:>12} {:>12} {:>12} {:>10} {:>10}",
            "measure", "subgoal", "no subgoal", "difference", "statistic", "p"
        );
        for c in &self.comparisons {
            let _ = writeln!(
                out,
                "{:<22} {:>12.4} {:>12.4} {:>12.4} {:>10.3} {:>10.4}",
                format!("{} ({})", c.measure, c.summary),
                c.with_subgoal,
                c.without_subgoal,
                c.difference,
                c.test.statistic,
                c.test.p_value
            );
        }
        out
    }
}

fn rank_comparison(measure: &str, summary: &str, a: &[f64], b: &[f64], stat: fn(&[f64]) -> f64) -> Result<Comparison> {
    let (x, y) = (stat(a), stat(b));
    Ok(Comparison {
        measure: measure.to_string(),
        summary: summary.to_string(),
        with_subgoal: x,
        without_subgoal: y,
        difference: x - y,
        test: mann_whitney_u(a, b, Alternative::TwoSided)?,
    })
}

/// Per-run scores of one condition, from simulation or from people.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcomes {
    pub gas: Vec<f64>,
    pub ds: Vec<f64>,
    pub resources: Vec<f64>,
}

impl Outcomes {
    pub fn len(&self) -> usize {
        self.gas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gas.is_empty()
    }

    pub fn push(&mut self, gas: f64, ds: f64, resources: f64) {
        self.gas.push(gas);
        self.ds.push(ds);
        self.resources.push(resources);
    }

    fn positive_gas_count(&self) -> usize {
        self.gas.iter().filter(|&&g| g > 0.0).count()
    }
}

impl From<&BatchResult> for Outcomes {
    fn from(b: &BatchResult) -> Self {
        Self {
            gas: b.gas(),
            ds: b.ds(),
            resources: b.resources(),
        }
    }
}

/// Mean GAS, share of positive GAS, mean resource use and median distance
/// score, each with its test.
pub fn compare_conditions(with_subgoal: &BatchResult, without: &BatchResult) -> Result<ComparisonReport> {
    compare_outcomes(&with_subgoal.into(), &without.into())
}

pub fn compare_outcomes(with_subgoal: &Outcomes, without: &Outcomes) -> Result<ComparisonReport> {
    if with_subgoal.is_empty() || without.is_empty() {
        return Err(Error::contract("both conditions need at least one run"));
    }
    let (na, nb) = (with_subgoal.len(), without.len());
    let (pa, pb) = (with_subgoal.positive_gas_count(), without.positive_gas_count());
    let positive = Comparison {
        measure: "positive_gas".to_string(),
        summary: "proportion".to_string(),
        with_subgoal: pa as f64 / na as f64,
        without_subgoal: pb as f64 / nb as f64,
        difference: pa as f64 / na as f64 - pb as f64 / nb as f64,
        test: two_proportion_z(pa as u64, na as u64, pb as u64, nb as u64, Alternative::TwoSided)?,
    };
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        n_with_subgoal: na,
        n_without_subgoal: nb,
        comparisons: vec![
            rank_comparison("gas", "mean", &with_subgoal.gas, &without.gas, mean)?,
            positive,
            rank_comparison("resources", "mean", &with_subgoal.resources, &without.resources, mean)?,
            rank_comparison("distance_score", "median", &with_subgoal.ds, &without.ds, median)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::make_population;
    use crate::harness::run_batch;
    use crate::io::default_farm;
    use crate::smw::{GoalProgram, GoalSpec};

    fn batches() -> (BatchResult, BatchResult) {
        let mut ctx = default_farm().context();
        ctx.population = make_population(&[0.4, 0.8, 1.2, 1.6]).unwrap();
        let sub = GoalSpec::new(vec![0, 1], vec![0.0, 4.0], vec![0.121, 0.012], 1.0).unwrap();
        let with = GoalProgram::new(vec![sub], ctx.final_goal.clone(), 5).unwrap();
        let without = GoalProgram::final_only(ctx.final_goal.clone(), 5).unwrap();
        (
            run_batch(&ctx, &with, 5, 1).unwrap(),
            run_batch(&ctx, &without, 5, 2).unwrap(),
        )
    }

    #[test]
    fn identical_inputs_show_no_effect() {
        let (a, _) = batches();
        let r = compare_conditions(&a, &a).unwrap();
        assert_eq!(r.comparisons.len(), 4);
        for c in &r.comparisons {
            assert_eq!(c.difference, 0.0, "{}", c.measure);
            assert!(c.test.p_value >= 0.99, "{}", c.measure);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let (a, b) = batches();
        let r1 = serde_json::to_string(&compare_conditions(&a, &b).unwrap()).unwrap();
        let r2 = serde_json::to_string(&compare_conditions(&a, &b).unwrap()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn table_lists_every_measure() {
        let (a, b) = batches();
        let t = compare_conditions(&a, &b).unwrap().to_table();
        for m in ["gas", "positive_gas", "resources", "distance_score"] {
            assert!(t.contains(m));
        }
    }
}
