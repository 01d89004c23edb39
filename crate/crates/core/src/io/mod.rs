//! JSON file formats: environment files, subgoal files and generic record
//! reading and writing. Every record carries a `schema_version`.

mod env_file;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use env_file::{
    default_farm, default_farm_json, load_environment, EnvironmentFile, EnvironmentSection, GoalEntry,
    PopulationSection, Scenario,
};

use crate::error::{Error, Result};
use crate::optimize::OptimizationReport;
use crate::smw::{Environment, GoalSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty-printed JSON with a trailing newline. Output is a pure function of
/// `value`, so equal values give byte-identical files.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// A hand-written list of subgoals, dims given by state name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalRecord {
    pub schema_version: u32,
    pub subgoals: Vec<GoalEntry>,
}

impl GoalRecord {
    pub fn new(goals: &[GoalSpec], env: &Environment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            subgoals: goals
                .iter()
                .map(|g| GoalEntry::from_goal(g, env.state_names()))
                .collect(),
        }
    }

    pub fn to_goals(&self, env: &Environment) -> Result<Vec<GoalSpec>> {
        self.subgoals
            .iter()
            .enumerate()
            .map(|(i, g)| g.to_goal(env, &format!("subgoals[{i}]"), false))
            .collect()
    }
}

/// Subgoals from either an optimisation report (its winner) or a
/// [`GoalRecord`].
pub fn subgoals_from_json(text: &str, env: &Environment) -> Result<Vec<GoalSpec>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::field("<root>", e.to_string()))?;
    if value.get("winner").is_some() {
        let report: OptimizationReport =
            serde_json::from_value(value).map_err(|e| Error::field("<root>", e.to_string()))?;
        if report.state_names != env.state_names() {
            return Err(Error::field(
                "state_names",
                "report was produced for a different environment",
            ));
        }
        Ok(vec![report.winner.to_goal()?])
    } else {
        let record: GoalRecord = serde_path_to_error::deserialize(value)
            .map_err(|e| Error::field(e.path().to_string(), e.into_inner().to_string()))?;
        record.to_goals(env)
    }
}

pub fn load_subgoals(path: impl AsRef<Path>, env: &Environment) -> Result<Vec<GoalSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    subgoals_from_json(&text, env).map_err(|e| e.in_file(path))
}
