use serde::{Deserialize, Serialize};

use super::profile::UserProfile;
use crate::orchestrator::{AssistLevel, GuidanceStep, UserActionKind};
use crate::rng::SimRng;

/// What the robot just asked of the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptKind {
    Reminder(AssistLevel),
    Step(GuidanceStep),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reply {
    /// Does what the step asks.
    Act(UserActionKind),
    /// Agrees to come along or be guided.
    Accept,
    /// Says no or that they cannot.
    Decline,
    Refuse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedReply {
    pub delay: f64,
    pub reply: Reply,
}

/// Response latency: normal, floored at 0.3 s.
pub fn sample_latency(p: &UserProfile, rng: &mut SimRng) -> f64 {
    rng.normal(p.latency_mean, p.latency_sd).max(0.3)
}

/// Samples the user's reaction to a prompt. `None` is silence.
pub fn respond(p: &UserProfile, prompt: PromptKind, rng: &mut SimRng) -> Option<TimedReply> {
    // Draw order is fixed so outcomes stay aligned across profiles.
    let u_forget = rng.uniform();
    let u_ok = rng.uniform();
    let u_kind = rng.uniform();
    let delay = sample_latency(p, rng);
    // Non-compliance is silence, or a refusal at `refusal_rate`.
    let unwilling = |u: f64| (u < p.refusal_rate).then_some(TimedReply { delay, reply: Reply::Refuse });
    if u_ok >= p.compliance {
        return unwilling(u_kind);
    }
    match prompt {
        PromptKind::Reminder(_) => {
            (u_forget >= p.forgetfulness).then_some(TimedReply { delay, reply: Reply::Accept })
        }
        PromptKind::Step(step) => {
            if u_forget >= p.step_difficulty {
                Some(TimedReply { delay, reply: Reply::Act(step.action()) })
            } else if u_kind < 0.5 {
                None
            } else {
                Some(TimedReply { delay, reply: Reply::Decline })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Searching without help.
    Unaided,
    /// Following the robot's pointing gesture.
    Guided,
}

/// Time until the user first fixates the bottle, seconds.
pub fn search_behavior(p: &UserProfile, mode: SearchMode, rng: &mut SimRng) -> f64 {
    let z = rng.standard_normal();
    let m = &p.search;
    match mode {
        SearchMode::Unaided => m.base * (1.0 + m.disorientation_gain * p.disorientation) * (m.sigma * z).exp(),
        SearchMode::Guided => (m.guided_baseline + m.guided_sd * z).max(0.5),
    }
}
