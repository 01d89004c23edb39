use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{
    make_population_with, AgentPopulation, NoiseParams, DEFAULT_LAMBDA_RANGE, DEFAULT_POPULATION_SIZE,
};
use crate::error::{Error, Result};
use crate::optimize::SimulationContext;
use crate::smw::{Environment, GoalProgram, GoalSpec, Matrix, ScoreWeights};

use super::SCHEMA_VERSION;

const FARM_JSON: &str = include_str!("../../data/farm.json");

/// On-disk description of a microworld together with its canonical task
/// setting. Goals may be given either as scales or as tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comments: Vec<String>,
    pub environment: EnvironmentSection,
    /// Static graph positions for interactive clients, keyed by node name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub layout: BTreeMap<String, [f64; 2]>,
    pub initial_state: Vec<f64>,
    pub final_goal: GoalEntry,
    #[serde(default)]
    pub subgoals: Vec<GoalEntry>,
    #[serde(default)]
    pub score_weights: ScoreWeights,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<PopulationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    /// State-to-state weights, row-major, one row per state.
    #[serde(alias = "A")]
    pub transition: Vec<Vec<f64>>,
    /// Action-to-state weights, row-major, one row per state.
    #[serde(alias = "B")]
    pub input: Vec<Vec<f64>>,
}

/// A goal as written in files. `dims` names the constrained states and may
/// be omitted for the final goal. Exactly one of `scales` and `tolerances`
/// must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<String>>,
    pub targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Vec<f64>>,
    pub threshold: f64,
}

impl GoalEntry {
    /// Writes `goal` with state names and scales.
    pub fn from_goal(goal: &GoalSpec, state_names: &[String]) -> Self {
        Self {
            dims: Some(goal.dims().iter().map(|&d| state_names[d].clone()).collect()),
            targets: goal.targets().to_vec(),
            scales: Some(goal.scale().to_vec()),
            tolerances: None,
            threshold: goal.threshold(),
        }
    }

    /// Resolves names and converts tolerances. `field` prefixes diagnostics.
    pub fn to_goal(&self, env: &Environment, field: &str, require_full: bool) -> Result<GoalSpec> {
        let n = env.num_states();
        let dims: Vec<usize> = match &self.dims {
            None if require_full || self.targets.len() == n => (0..n).collect(),
            None => return Err(Error::field(format!("{field}.dims"), "required for a subgoal")),
            Some(names) => names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    env.state_index(name)
                        .ok_or_else(|| Error::field(format!("{field}.dims[{i}]"), format!("unknown state `{name}`")))
                })
                .collect::<Result<_>>()?,
        };
        if require_full && dims != (0..n).collect::<Vec<_>>() {
            return Err(Error::field(
                format!("{field}.dims"),
                "the final goal must list every state in order",
            ));
        }
        if self.targets.len() != dims.len() {
            return Err(Error::field(
                format!("{field}.targets"),
                format!("expected {} values, found {}", dims.len(), self.targets.len()),
            ));
        }
        check_finite(&self.targets, &format!("{field}.targets"))?;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::field(format!("{field}.threshold"), "must be positive"));
        }
        let scale = match (&self.scales, &self.tolerances) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::field(
                    field.to_string(),
                    "give exactly one of `scales` and `tolerances`",
                ))
            }
            (Some(s), None) => {
                check_len(s, dims.len(), &format!("{field}.scales"))?;
                check_positive(s, &format!("{field}.scales"))?;
                s.clone()
            }
            (None, Some(t)) => {
                check_len(t, dims.len(), &format!("{field}.tolerances"))?;
                check_positive(t, &format!("{field}.tolerances"))?;
                let d = dims.len() as f64;
                t.iter()
                    .map(|&tol| self.threshold * self.threshold / (d * tol * tol))
                    .collect()
            }
        };
        let mut order: Vec<usize> = (0..dims.len()).collect();
        order.sort_by_key(|&i| dims[i]);
        if order.windows(2).any(|w| dims[w[0]] == dims[w[1]]) {
            return Err(Error::field(format!("{field}.dims"), "a state is listed twice"));
        }
        GoalSpec::new(
            order.iter().map(|&i| dims[i]).collect(),
            order.iter().map(|&i| self.targets[i]).collect(),
            order.iter().map(|&i| scale[i]).collect(),
            self.threshold,
        )
        .map_err(|e| Error::field(field.to_string(), e.to_string()))
    }
}

/// How to build the agent population. `lambdas` wins over `count` and
/// `lambda_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_range: Option<[f64; 2]>,
    #[serde(default)]
    pub noise: NoiseParams,
}

impl PopulationSection {
    fn build(&self) -> Result<AgentPopulation> {
        self.noise
            .validate()
            .map_err(|e| Error::field("population.noise", e.to_string()))?;
        if let Some(lambdas) = &self.lambdas {
            if lambdas.is_empty() {
                return Err(Error::field("population.lambdas", "must not be empty"));
            }
            check_positive(lambdas, "population.lambdas")?;
            return make_population_with(lambdas, self.noise);
        }
        let count = self.count.unwrap_or(DEFAULT_POPULATION_SIZE);
        if count == 0 {
            return Err(Error::field("population.count", "must be positive"));
        }
        let [lo, hi] = self
            .lambda_range
            .unwrap_or([DEFAULT_LAMBDA_RANGE.0, DEFAULT_LAMBDA_RANGE.1]);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::field("population.lambda_range", "need 0 < lo <= hi"));
        }
        AgentPopulation::evenly_spaced(lo, hi, count, self.noise)
    }
}

/// A validated environment file: the dynamics plus the task it ships with.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub comments: Vec<String>,
    pub layout: BTreeMap<String, [f64; 2]>,
    pub env: Environment,
    pub initial_state: Vec<f64>,
    pub final_goal: GoalSpec,
    pub subgoals: Vec<GoalSpec>,
    pub weights: ScoreWeights,
    pub horizon: usize,
    pub population: AgentPopulation,
}

impl Scenario {
    /// The file's goal program: its subgoals followed by the final goal.
    pub fn program(&self) -> GoalProgram {
        self.program_with(self.subgoals.clone())
    }

    pub fn final_only(&self) -> GoalProgram {
        self.program_with(Vec::new())
    }

    pub fn program_with(&self, subgoals: Vec<GoalSpec>) -> GoalProgram {
        GoalProgram::new(subgoals, self.final_goal.clone(), self.env.num_states())
            .expect("scenario goals were validated against the environment")
    }

    pub fn context(&self) -> SimulationContext {
        SimulationContext {
            env: self.env.clone(),
            final_goal: self.final_goal.clone(),
            initial_state: self.initial_state.clone(),
            horizon: self.horizon,
            population: self.population.clone(),
            weights: self.weights,
        }
    }

    pub fn to_file(&self) -> EnvironmentFile {
        let names = self.env.state_names();
        let mut final_goal = GoalEntry::from_goal(&self.final_goal, names);
        final_goal.dims = None;
        let lambdas = self.population.lambdas();
        EnvironmentFile {
            schema_version: SCHEMA_VERSION,
            name: Some(self.name.clone()),
            comments: self.comments.clone(),
            environment: EnvironmentSection {
                state_names: names.to_vec(),
                action_names: self.env.action_names().to_vec(),
                transition: self.env.transition().to_rows(),
                input: self.env.input().to_rows(),
            },
            layout: self.layout.clone(),
            initial_state: self.initial_state.clone(),
            final_goal,
            subgoals: self.subgoals.iter().map(|g| GoalEntry::from_goal(g, names)).collect(),
            score_weights: self.weights,
            horizon: self.horizon,
            population: Some(PopulationSection {
                lambdas: Some(lambdas),
                count: None,
                lambda_range: None,
                noise: self.population.agents()[0].noise,
            }),
        }
    }
}

impl EnvironmentFile {
    /// Parses JSON text. Errors carry the JSON path of the offending value.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::field(field, e.into_inner().to_string())
        })
    }

    pub fn validate(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::field(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let sec = &self.environment;
        check_names(&sec.state_names, "environment.state_names")?;
        check_names(&sec.action_names, "environment.action_names")?;
        let n = sec.state_names.len();
        let m = sec.action_names.len();
        let a = matrix_field(&sec.transition, n, n, "environment.transition")?;
        let b = matrix_field(&sec.input, n, m, "environment.input")?;
        let env = Environment::new(sec.state_names.clone(), sec.action_names.clone(), a, b)
            .map_err(|e| Error::field("environment", e.to_string()))?;

        check_len(&self.initial_state, n, "initial_state")?;
        check_finite(&self.initial_state, "initial_state")?;
        let final_goal = self.final_goal.to_goal(&env, "final_goal", true)?;
        let subgoals = self
            .subgoals
            .iter()
            .enumerate()
            .map(|(i, g)| g.to_goal(&env, &format!("subgoals[{i}]"), false))
            .collect::<Result<Vec<_>>>()?;
        let w = &self.score_weights;
        check_finite(&[w.w1, w.w2, w.w3, w.c], "score_weights")?;
        if self.horizon == 0 {
            return Err(Error::field("horizon", "must be at least 1"));
        }
        let population = match &self.population {
            Some(p) => p.build()?,
            None => AgentPopulation::default(),
        };
        for key in self.layout.keys() {
            if env.state_index(key).is_none() && !env.action_names().contains(key) {
                return Err(Error::field(format!("layout.{key}"), "not a state or action name"));
            }
        }
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "environment".to_string()),
            comments: self.comments.clone(),
            layout: self.layout.clone(),
            env,
            initial_state: self.initial_state.clone(),
            final_goal,
            subgoals,
            weights: self.score_weights,
            horizon: self.horizon,
            population,
        })
    }
}

/// Reads and validates an environment file. The scenario name defaults to
/// the file stem.
pub fn load_environment(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = EnvironmentFile::parse(&text).map_err(|e| e.in_file(path))?;
    let mut scenario = file.validate().map_err(|e| e.in_file(path))?;
    if file.name.is_none() {
        if let Some(stem) = path.file_stem() {
            scenario.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(scenario)
}

/// The bundled five-state farm microworld.
pub fn default_farm() -> Scenario {
    EnvironmentFile::parse(FARM_JSON)
        .and_then(|f| f.validate())
        .expect("bundled farm file is valid")
}

pub fn default_farm_json() -> &'static str {
    FARM_JSON
}

fn check_names(names: &[String], field: &str) -> Result<()> {
    if names.is_empty() {
        return Err(Error::field(field, "must not be empty"));
    }
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(Error::field(
                format!("{field}[{i}]"),
                format!("duplicate name `{name}`"),
            ));
        }
    }
    Ok(())
}

fn matrix_field(rows: &[Vec<f64>], n_rows: usize, n_cols: usize, field: &str) -> Result<Matrix> {
    if rows.len() != n_rows {
        return Err(Error::field(
            field,
            format!("expected {n_rows} rows, found {}", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        check_len(row, n_cols, &format!("{field}[{i}]"))?;
        check_finite(row, &format!("{field}[{i}]"))?;
    }
    Matrix::from_rows(rows).map_err(|e| Error::field(field, e.to_string()))
}

fn check_len(values: &[f64], expected: usize, field: &str) -> Result<()> {
    if values.len() != expected {
        return Err(Error::field(
            field,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(())
}

fn check_finite(values: &[f64], field: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::field(format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn check_positive(values: &[f64], field: &str) -> Result<()> {
    match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(i) => Err(Error::field(format!("{field}[{i}]"), "must be positive")),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn farm_value() -> serde_json::Value {
        serde_json::from_str(FARM_JSON).unwrap()
    }

    fn validate_value(v: serde_json::Value) -> Result<Scenario> {
        EnvironmentFile::parse(&v.to_string())?.validate()
    }

    fn field_of(err: Error) -> String {
        match err {
            Error::Field { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn bundled_farm_matches_canonical_setting() {
        let farm = default_farm();
        assert_eq!(farm.env.num_states(), 5);
        assert_eq!(farm.env.num_actions(), 3);
        let c = farm.env.state_index("Crowding").unwrap();
        assert_eq!(farm.env.transition().get(c, c), 1.5);
        assert!(farm.env.state_index("SpaceWorms").is_some());
        assert_eq!(farm.initial_state, vec![80.0, 20.0, 90.0, 10.0, 70.0]);
        assert_eq!(farm.final_goal.scale(), &[1.0; 5]);
        assert_eq!(farm.final_goal.threshold(), 50.0);
        assert_eq!(farm.horizon, 20);
        assert_eq!(farm.population.len(), 30);
    }

    #[test]
    fn wrong_transition_shape_names_the_field() {
        let mut v = farm_value();
        v["environment"]["transition"][2] = serde_json::json!([1.0, 0.0]);
        let err = validate_value(v).unwrap_err();
        assert_eq!(field_of(err), "environment.transition[2]");

        let mut v = farm_value();
        v["environment"]["input"].as_array_mut().unwrap().pop();
        assert_eq!(field_of(validate_value(v).unwrap_err()), "environment.input");
    }

    #[test]
    fn tolerances_convert_to_scales() {
        let mut v = farm_value();
        let tol = 50.0 / 5f64.sqrt();
        v["final_goal"] = serde_json::json!({
            "targets": [0, 0, 0, 0, 0],
            "tolerances": [tol, tol, tol, tol, tol],
            "threshold": 50.0
        });
        let s = validate_value(v).unwrap();
        for g in s.final_goal.scale() {
            assert!((g - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let mut v = farm_value();
        v["subgoals"] = serde_json::json!([
            {"dims": ["Crowding", "SpaceWorms"], "targets": [0, 4], "tolerances": [2.0, 0.0], "threshold": 1}
        ]);
        assert_eq!(field_of(validate_value(v).unwrap_err()), "subgoals[0].tolerances[1]");
    }

    #[test]
    fn goal_needs_exactly_one_of_scales_and_tolerances() {
        let mut v = farm_value();
        v["final_goal"]["tolerances"] = serde_json::json!([1, 1, 1, 1, 1]);
        assert_eq!(field_of(validate_value(v).unwrap_err()), "final_goal");
    }

    #[test]
    fn subgoal_dims_by_name_in_any_order() {
        let mut v = farm_value();
        v["subgoals"] = serde_json::json!([
            {"dims": ["SpaceWorms", "Crowding"], "targets": [4, 0], "scales": [0.012, 0.121], "threshold": 1}
        ]);
        let s = validate_value(v).unwrap();
        let g = &s.subgoals[0];
        assert_eq!(g.dims(), &[0, 1]);
        assert_eq!(g.targets(), &[0.0, 4.0]);
        assert_eq!(g.scale(), &[0.121, 0.012]);

        let mut v = farm_value();
        v["subgoals"] = serde_json::json!([
            {"dims": ["Crowding", "Weeds"], "targets": [0, 4], "scales": [1, 1], "threshold": 1}
        ]);
        assert_eq!(field_of(validate_value(v).unwrap_err()), "subgoals[0].dims[1]");
    }

    #[test]
    fn parse_errors_carry_json_path() {
        let mut v = farm_value();
        v["horizon"] = serde_json::json!("twenty");
        let err = EnvironmentFile::parse(&v.to_string()).unwrap_err();
        assert_eq!(field_of(err), "horizon");

        let mut v = farm_value();
        v["environment"]["transition"][1][3] = serde_json::json!(null);
        let err = EnvironmentFile::parse(&v.to_string()).unwrap_err();
        assert_eq!(field_of(err), "environment.transition[1][3]");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = farm_value();
        v["horizonn"] = serde_json::json!(20);
        assert!(EnvironmentFile::parse(&v.to_string()).is_err());
    }

    #[test]
    fn scenario_round_trips_through_file() {
        let mut farm = default_farm();
        farm.subgoals = vec![GoalSpec::new(vec![0, 1], vec![0.0, 4.0], vec![0.121, 0.012], 1.0).unwrap()];
        let text = serde_json::to_string(&farm.to_file()).unwrap();
        let back = EnvironmentFile::parse(&text).unwrap().validate().unwrap();
        assert_eq!(back, farm);
    }

    #[test]
    fn load_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("broken.json");
        std::fs::write(&p, "{").unwrap();
        let err = load_environment(&p).unwrap_err();
        assert!(err.to_string().contains("broken.json"));
        assert!(matches!(
            load_environment(dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
