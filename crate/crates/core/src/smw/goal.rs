use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target values with a diagonal scale and an achievement threshold over a
/// subset of state dimensions. Final goals cover every dimension; subgoals
/// cover a subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    dims: Vec<usize>,
    targets: Vec<f64>,
    scale: Vec<f64>,
    threshold: f64,
}

impl GoalSpec {
    pub fn new(dims: Vec<usize>, targets: Vec<f64>, scale: Vec<f64>, threshold: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::contract("goal must constrain at least one dimension"));
        }
        if targets.len() != dims.len() || scale.len() != dims.len() {
            return Err(Error::contract(format!(
                "goal has {} dims but {} targets and {} scales",
                dims.len(),
                targets.len(),
                scale.len()
            )));
        }
        if dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("goal dims must be strictly increasing"));
        }
        if !targets.iter().all(|t| t.is_finite()) {
            return Err(Error::contract("goal targets must be finite"));
        }
        if !scale.iter().all(|&g| g > 0.0 && g.is_finite()) {
            return Err(Error::contract("goal scales must be positive and finite"));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::contract("goal threshold must be positive and finite"));
        }
        Ok(Self {
            dims,
            targets,
            scale,
            threshold,
        })
    }

    /// A goal over every dimension `0..targets.len()`.
    pub fn full(targets: Vec<f64>, scale: Vec<f64>, threshold: f64) -> Result<Self> {
        Self::new((0..targets.len()).collect(), targets, scale, threshold)
    }

    /// Builds a goal from per-dimension tolerances instead of scales.
    pub fn from_tolerances(dims: Vec<usize>, targets: Vec<f64>, tolerances: &[f64], threshold: f64) -> Result<Self> {
        let scale = tolerance_to_scale(tolerances, threshold)?;
        Self::new(dims, targets, scale, threshold)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        Self::new(self.dims.clone(), self.targets.clone(), self.scale.clone(), threshold)
    }

    /// Checks the goal against a state space of `n` dimensions.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        match self.dims.last() {
            Some(&d) if d >= n => Err(Error::contract(format!("goal dim {d} out of range for {n} states"))),
            _ => Ok(()),
        }
    }

    pub fn covers_all(&self, n: usize) -> bool {
        self.dims.len() == n && self.dims.iter().enumerate().all(|(i, &d)| i == d)
    }

    /// Scale-weighted distance between the reduced state and the targets.
    ///
    /// Panics if a goal dimension is out of range for `s`.
    pub fn distance(&self, s: &[f64]) -> f64 {
        self.dims
            .iter()
            .zip(&self.targets)
            .zip(&self.scale)
            .map(|((&d, t), g)| g * (s[d] - t) * (s[d] - t))
            .sum::<f64>()
            .sqrt()
    }

    /// Inclusive: a state exactly at the threshold counts as achieved.
    pub fn is_achieved(&self, s: &[f64]) -> bool {
        self.distance(s) <= self.threshold
    }

    /// Per-dimension tolerance band implied by scale and threshold.
    pub fn tolerances(&self) -> Vec<f64> {
        scale_to_tolerance(&self.scale, self.threshold)
    }
}

/// `θ_i = δ / sqrt(d · γ_i)` with `d` the number of goal dimensions.
pub fn scale_to_tolerance(scale: &[f64], threshold: f64) -> Vec<f64> {
    let d = scale.len() as f64;
    scale.iter().map(|g| threshold / (d * g).sqrt()).collect()
}

/// Inverse of [`scale_to_tolerance`]: `γ_i = δ² / (d · θ_i²)`.
pub fn tolerance_to_scale(tolerances: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if let Some(t) = tolerances.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::contract(format!("tolerance must be positive, got {t}")));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::contract("threshold must be positive"));
    }
    let d = tolerances.len() as f64;
    Ok(tolerances.iter().map(|t| threshold * threshold / (d * t * t)).collect())
}

/// The ordered sequence of subgoals followed by the final goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalProgram {
    subgoals: Vec<GoalSpec>,
    final_goal: GoalSpec,
}

impl GoalProgram {
    pub fn new(subgoals: Vec<GoalSpec>, final_goal: GoalSpec, num_states: usize) -> Result<Self> {
        if !final_goal.covers_all(num_states) {
            return Err(Error::contract("final goal must cover every state dimension"));
        }
        for g in &subgoals {
            g.validate_for(num_states)?;
        }
        Ok(Self { subgoals, final_goal })
    }

    pub fn final_only(final_goal: GoalSpec, num_states: usize) -> Result<Self> {
        Self::new(Vec::new(), final_goal, num_states)
    }

    pub fn subgoals(&self) -> &[GoalSpec] {
        &self.subgoals
    }

    pub fn final_goal(&self) -> &GoalSpec {
        &self.final_goal
    }

    /// Number of elements in the program, final goal included.
    pub fn len(&self) -> usize {
        self.subgoals.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Element `i` of `(ε_1, …, ε_k, g)`.
    pub fn goal(&self, i: usize) -> &GoalSpec {
        self.subgoals.get(i).unwrap_or(&self.final_goal)
    }

    pub fn final_index(&self) -> usize {
        self.subgoals.len()
    }

    /// Retires every subgoal from `active` onward that `s` satisfies, stopping
    /// at the first unachieved one. The final goal is never retired.
    pub fn advance(&self, mut active: usize, s: &[f64]) -> usize {
        while active < self.subgoals.len() && self.subgoals[active].is_achieved(s) {
            active += 1;
        }
        active
    }
}
