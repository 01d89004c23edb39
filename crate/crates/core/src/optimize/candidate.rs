use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::smw::GoalSpec;

/// A two-dimensional subgoal under consideration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgoalCandidate {
    pub dims: [usize; 2],
    pub targets: [f64; 2],
    pub scale: [f64; 2],
    pub threshold: f64,
}

impl SubgoalCandidate {
    pub fn to_goal(&self) -> Result<GoalSpec> {
        GoalSpec::new(
            self.dims.to_vec(),
            self.targets.to_vec(),
            self.scale.to_vec(),
            self.threshold,
        )
    }

    pub fn tolerances(&self) -> [f64; 2] {
        let t = crate::smw::scale_to_tolerance(&self.scale, self.threshold);
        [t[0], t[1]]
    }
}
