//! Assistance orchestration: the event-driven escalation state machine,
//! intent interpretation, pointing gestures, and the episode driver that
//! closes the loop with the simulated world and user.

mod episode;
mod gesture;
mod intent;
mod log;
mod machine;
mod types;

use thiserror::Error;

pub use episode::{run_episode, Episode, EpisodeConfig, EpisodeMeta, World};
pub use gesture::{gesture_action, target_after, PointingConfig};
pub use intent::{interpret, Deadline, IntentBackend, RuleBackend};
pub use log::{LogEnd, LogError, LogEvent, LogHeader, LogRecord, Outcome, SessionLog, LOG_SCHEMA_VERSION};
pub use machine::{reminder_text, step, AssistMode, OrchestratorConfig, OrchestratorState, Transition};
pub use types::{Action, AssistEvent, AssistLevel, Gesture, GuidanceStep, IntentKind, Phase, TimedEvent, TimerCmd, UserActionKind};

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrchestratorError {
    #[error("invalid event in {phase:?}: {reason}")]
    InvalidEvent { phase: Phase, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
