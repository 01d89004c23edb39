//! Interactive sessions over HTTP and JSON.
//!
//! A session walks one player through the task round by round. The service
//! is the only place dynamics are computed; clients render what it returns.

mod http;
mod session;

pub use http::{
    router, serve, AppState, CreateResponse, CreateSession, EnvEntry, FinishResponse, StepRequest, SESSION_DIR_ENV,
};
pub use session::{
    graph_view, ActiveGoalView, Condition, Edge, EventKind, FinalScores, GoalDimView, GraphView, Session, SessionError,
    SessionEvent, SessionRecord, SessionStatus, SessionView, StepResponse,
};
