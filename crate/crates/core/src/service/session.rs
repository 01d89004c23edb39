use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::io::{Scenario, SCHEMA_VERSION};
use crate::smw::{distance_score, goal_achievement_score, resource_usage, GoalProgram, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Subgoal,
    NoSubgoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Running,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// The subgoal at `index` of the goal program was retired.
    SubgoalAchieved {
        index: usize,
    },
    FinalGoalAchieved,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Number of rounds played when the event happened.
    pub round: usize,
    #[serde(flatten)]
    pub kind: EventKind,
    pub at: DateTime<Utc>,
}

/// Errors surfaced to clients.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Internal(String),
}

impl SessionError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalDimView {
    pub name: String,
    pub target: f64,
    /// Tolerance rounded to the nearest integer for display.
    pub tolerance: f64,
}

/// The goal currently shown to the player. Only its own dimensions are
/// listed, so a subgoal never reveals targets for the other states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveGoalView {
    /// `subgoal` or `final`.
    pub kind: String,
    pub index: usize,
    pub dims: Vec<GoalDimView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Static causal graph for drawing. Self-loops appear only for states
/// whose self-weight exceeds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub edges: Vec<Edge>,
    pub layout: std::collections::BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub round: usize,
    pub state: Vec<f64>,
    pub active_goal: ActiveGoalView,
    pub subgoal_achieved: bool,
    pub final_goal_achieved: bool,
    pub bonus: f64,
    pub distance_to_active_goal: f64,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: Uuid,
    pub env_id: String,
    pub condition: Condition,
    pub status: SessionStatus,
    pub round: usize,
    pub horizon: usize,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    pub state: Vec<f64>,
    pub active_goal: ActiveGoalView,
    pub distance_to_active_goal: f64,
    pub bonus: f64,
    pub resources_used: f64,
    pub finished: bool,
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub events: Vec<SessionEvent>,
    pub graph: GraphView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScores {
    pub gas: f64,
    pub ds: f64,
    pub resources: f64,
    pub rounds_played: usize,
    pub rounds_achieved: usize,
}

/// What a finished session leaves on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub session_id: Uuid,
    pub env_id: String,
    pub condition: Condition,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    pub program: GoalProgram,
    pub trajectory: Trajectory,
    pub events: Vec<SessionEvent>,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    /// Wall-clock time of each accepted step.
    pub step_times: Vec<DateTime<Utc>>,
    pub scores: FinalScores,
}

/// One player's run through the task.
#[derive(Debug, Clone)]
pub struct Session {
    id: Uuid,
    env_id: String,
    condition: Condition,
    scenario: Arc<Scenario>,
    program: GoalProgram,
    trajectory: Trajectory,
    active: usize,
    events: Vec<SessionEvent>,
    started_at: DateTime<Utc>,
    finished_at: Option<DateTime<Utc>>,
    step_times: Vec<DateTime<Utc>>,
    persisted: bool,
}

impl Session {
    /// Starts at the scenario's initial state. Subgoals already met there
    /// are retired immediately.
    pub fn new(id: Uuid, env_id: String, condition: Condition, scenario: Arc<Scenario>, program: GoalProgram) -> Self {
        let s0 = scenario.initial_state.clone();
        let active = program.advance(0, &s0);
        Self {
            id,
            env_id,
            condition,
            program,
            trajectory: Trajectory::start(s0),
            active,
            events: Vec::new(),
            started_at: Utc::now(),
            finished_at: None,
            step_times: Vec::new(),
            persisted: false,
            scenario,
        }
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn round(&self) -> usize {
        self.trajectory.rounds()
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn program(&self) -> &GoalProgram {
        &self.program
    }

    pub fn is_finished(&self) -> bool {
        self.finished_at.is_some() || self.round() >= self.scenario.horizon
    }

    /// Running bonus: the goal-achievement score of the rounds played so far,
    /// with unplayed rounds counting as not achieved.
    pub fn bonus(&self) -> f64 {
        goal_achievement_score(&self.trajectory, self.program.final_goal(), &self.scenario.weights)
    }

    fn active_goal_view(&self) -> ActiveGoalView {
        let goal = self.program.goal(self.active);
        let names = self.scenario.env.state_names();
        ActiveGoalView {
            kind: if self.active == self.program.final_index() {
                "final"
            } else {
                "subgoal"
            }
            .to_string(),
            index: self.active,
            dims: goal
                .dims()
                .iter()
                .zip(goal.targets())
                .zip(goal.tolerances())
                .map(|((&d, &t), tol)| GoalDimView {
                    name: names[d].clone(),
                    target: t,
                    tolerance: tol.round(),
                })
                .collect(),
        }
    }

    fn distance_to_active(&self) -> f64 {
        self.program.goal(self.active).distance(self.trajectory.last_state())
    }

    /// Applies one round of the dynamics to `action`.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResponse, SessionError> {
        if self.is_finished() {
            return Err(SessionError::Conflict("session is finished".into()));
        }
        let env = &self.scenario.env;
        if action.len() != env.num_actions() {
            return Err(SessionError::validation(
                "action",
                format!("expected {} values, found {}", env.num_actions(), action.len()),
            ));
        }
        if let Some(i) = action.iter().position(|v| !v.is_finite()) {
            return Err(SessionError::validation(
                format!("action[{i}]"),
                "must be a finite number",
            ));
        }
        let next = env
            .step(self.trajectory.last_state(), action)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        let now = Utc::now();
        let before = self.active;
        let final_hit = self.program.final_goal().is_achieved(&next);
        let after = self.program.advance(before, &next);
        self.trajectory.push(action.to_vec(), next, final_hit, before);
        self.active = after;
        self.step_times.push(now);
        let round = self.round();
        for index in before..after.min(self.program.final_index()) {
            self.events.push(SessionEvent {
                round,
                kind: EventKind::SubgoalAchieved { index },
                at: now,
            });
        }
        if final_hit {
            self.events.push(SessionEvent {
                round,
                kind: EventKind::FinalGoalAchieved,
                at: now,
            });
        }
        if round >= self.scenario.horizon {
            self.mark_finished(now);
        }
        Ok(StepResponse {
            round,
            state: self.trajectory.last_state().to_vec(),
            active_goal: self.active_goal_view(),
            subgoal_achieved: after > before,
            final_goal_achieved: final_hit,
            bonus: self.bonus(),
            distance_to_active_goal: self.distance_to_active(),
            finished: self.is_finished(),
        })
    }

    fn mark_finished(&mut self, at: DateTime<Utc>) {
        if self.finished_at.is_none() {
            self.finished_at = Some(at);
            self.events.push(SessionEvent {
                round: self.round(),
                kind: EventKind::Finished,
                at,
            });
        }
    }

    pub fn scores(&self) -> FinalScores {
        let fin = self.program.final_goal();
        FinalScores {
            gas: self.bonus(),
            ds: distance_score(&self.trajectory, fin, &self.scenario.weights),
            resources: resource_usage(&self.trajectory),
            rounds_played: self.round(),
            rounds_achieved: self.trajectory.rounds_achieved(fin),
        }
    }

    /// Ends the session and returns the record to persist. Finishing twice
    /// is a conflict.
    pub fn finish(&mut self) -> Result<SessionRecord, SessionError> {
        if self.persisted {
            return Err(SessionError::Conflict("session was already finished".into()));
        }
        self.mark_finished(Utc::now());
        self.persisted = true;
        Ok(self.record())
    }

    /// Undoes the persisted mark after a failed write so a retry can succeed.
    pub(crate) fn unmark_persisted(&mut self) {
        self.persisted = false;
    }

    pub fn record(&self) -> SessionRecord {
        SessionRecord {
            schema_version: SCHEMA_VERSION,
            session_id: self.id,
            env_id: self.env_id.clone(),
            condition: self.condition,
            state_names: self.scenario.env.state_names().to_vec(),
            action_names: self.scenario.env.action_names().to_vec(),
            program: self.program.clone(),
            trajectory: self.trajectory.clone(),
            events: self.events.clone(),
            started_at: self.started_at,
            finished_at: self.finished_at,
            step_times: self.step_times.clone(),
            scores: self.scores(),
        }
    }

    pub fn view(&self) -> SessionView {
        let env = &self.scenario.env;
        SessionView {
            session_id: self.id,
            env_id: self.env_id.clone(),
            condition: self.condition,
            status: if self.is_finished() {
                SessionStatus::Finished
            } else {
                SessionStatus::Running
            },
            round: self.round(),
            horizon: self.scenario.horizon,
            state_names: env.state_names().to_vec(),
            action_names: env.action_names().to_vec(),
            state: self.trajectory.last_state().to_vec(),
            active_goal: self.active_goal_view(),
            distance_to_active_goal: self.distance_to_active(),
            bonus: self.bonus(),
            resources_used: resource_usage(&self.trajectory),
            finished: self.is_finished(),
            states: self.trajectory.states.clone(),
            actions: self.trajectory.actions.clone(),
            events: self.events.clone(),
            graph: graph_view(&self.scenario),
        }
    }
}

pub fn graph_view(scenario: &Scenario) -> GraphView {
    let env = &scenario.env;
    let states = env.state_names();
    let actions = env.action_names();
    let mut edges = Vec::new();
    for (i, to) in states.iter().enumerate() {
        for (j, from) in actions.iter().enumerate() {
            let w = env.input().get(i, j);
            if w != 0.0 {
                edges.push(Edge {
                    from: from.clone(),
                    to: to.clone(),
                    weight: w,
                });
            }
        }
        for (j, from) in states.iter().enumerate() {
            let w = env.transition().get(i, j);
            let shown = if i == j { w > 1.0 } else { w != 0.0 };
            if shown {
                edges.push(Edge {
                    from: from.clone(),
                    to: to.clone(),
                    weight: w,
                });
            }
        }
    }
    GraphView {
        states: states.to_vec(),
        actions: actions.to_vec(),
        edges,
        layout: scenario.layout.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::default_farm;
    use crate::smw::GoalSpec;

    fn farm_session(condition: Condition) -> Session {
        let farm = Arc::new(default_farm());
        let program = match condition {
            Condition::Subgoal => {
                farm.program_with(vec![
                    GoalSpec::new(vec![0, 1], vec![0.0, 4.0], vec![0.121, 0.012], 1.0).unwrap()
                ])
            }
            Condition::NoSubgoal => farm.final_only(),
        };
        Session::new(Uuid::nil(), "farm".into(), condition, farm, program)
    }

    #[test]
    fn twenty_steps_finish_the_session() {
        let mut s = farm_session(Condition::NoSubgoal);
        for r in 1..=20 {
            let resp = s.step(&[0.0, 0.0, 0.0]).unwrap();
            assert_eq!(resp.round, r);
            assert_eq!(resp.finished, r == 20);
        }
        assert_eq!(s.trajectory().states.len(), 21);
        assert!(matches!(s.step(&[0.0; 3]), Err(SessionError::Conflict(_))));
        let rec = s.finish().unwrap();
        assert_eq!(rec.scores.gas, 0.2);
        assert!(matches!(s.finish(), Err(SessionError::Conflict(_))));
    }

    #[test]
    fn subgoal_view_hides_other_dims_until_achieved() {
        let mut s = farm_session(Condition::Subgoal);
        let v = s.view();
        assert_eq!(v.active_goal.kind, "subgoal");
        let names: Vec<_> = v.active_goal.dims.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["Crowding", "SpaceWorms"]);
        let tols: Vec<_> = v.active_goal.dims.iter().map(|d| d.tolerance).collect();
        assert_eq!(tols, [2.0, 6.0]);

        // Crowding' = 1.5·80 + 0.5·20 − 0.4·thin; SpaceWorms' = 20 − pest.
        let thin = (1.5 * 80.0 + 0.5 * 20.0) / 0.4;
        let resp = s.step(&[0.0, 16.0, thin]).unwrap();
        assert!(resp.subgoal_achieved);
        assert_eq!(resp.active_goal.kind, "final");
        assert_eq!(resp.active_goal.dims.len(), 5);
        assert!(s
            .view()
            .events
            .iter()
            .any(|e| e.kind == EventKind::SubgoalAchieved { index: 0 }));
    }

    #[test]
    fn malformed_actions_are_rejected_without_side_effects() {
        let mut s = farm_session(Condition::NoSubgoal);
        assert!(matches!(s.step(&[1.0]), Err(SessionError::Validation { .. })));
        let err = s.step(&[1.0, f64::NAN, 0.0]).unwrap_err();
        assert_eq!(err, SessionError::validation("action[1]", "must be a finite number"));
        assert_eq!(s.round(), 0);
    }

    #[test]
    fn bonus_tracks_truncated_score() {
        let mut s = farm_session(Condition::NoSubgoal);
        assert_eq!(s.bonus(), 0.2);
        s.step(&[-10.0, 10.0, 0.0]).unwrap();
        assert!((s.bonus() - (0.2 - 0.005 * 20.0)).abs() < 1e-12);
    }

    #[test]
    fn graph_shows_only_amplifying_self_loops() {
        let g = graph_view(&default_farm());
        let loops: Vec<_> = g.edges.iter().filter(|e| e.from == e.to).collect();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].from, "Crowding");
        assert_eq!(loops[0].weight, 1.5);
    }

    #[test]
    fn record_replays() {
        let mut s = farm_session(Condition::Subgoal);
        for k in 0..20 {
            s.step(&[k as f64 * 0.37, -1.25, 3.0 + k as f64]).unwrap();
        }
        let rec = s.finish().unwrap();
        let farm = default_farm();
        rec.trajectory.verify(&farm.env, &farm.final_goal).unwrap();
        let back: SessionRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        assert_eq!(back, rec);
    }
}
