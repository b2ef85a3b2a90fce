use serde::{Deserialize, Serialize};

use crate::orchestrator::{Action, AssistEvent, AssistLevel, Outcome, SessionLog};
use crate::usersim::{first_bottle_fixation, GazeSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub condition: String,
    pub seed: u64,
    /// Seconds from episode start to the first bottle fixation, or the cap.
    pub time_to_locate: f64,
    /// True when the bottle was never fixated and `time_to_locate` is the cap.
    pub censored: bool,
    pub interaction_rounds: u32,
    pub completed: bool,
    pub outcome: Outcome,
    pub duration: f64,
    pub level_trace: Vec<AssistLevel>,
}

/// Record presses answered by robot speech before the next press.
pub fn interaction_rounds(log: &SessionLog) -> u32 {
    let mut rounds = 0;
    let mut open = false;
    for e in log.events.iter().filter(|e| e.invalid.is_none()) {
        if let AssistEvent::RecordPressed { .. } = e.event {
            open = true;
        }
        if open && e.actions.iter().any(Action::is_speech) {
            rounds += 1;
            open = false;
        }
    }
    rounds
}

pub fn session_metrics(log: &SessionLog, gaze: &[GazeSample]) -> SessionMetrics {
    let h = &log.header;
    let (time_to_locate, censored) = match first_bottle_fixation(gaze) {
        Some(t) => (t - h.start_time, false),
        None => (h.cap, true),
    };
    SessionMetrics {
        condition: h.condition.clone(),
        seed: h.seed,
        time_to_locate,
        censored,
        interaction_rounds: interaction_rounds(log),
        completed: log.end.outcome == Outcome::Done,
        outcome: log.end.outcome,
        duration: log.end.t - h.start_time,
        level_trace: log.level_trace(),
    }
}
