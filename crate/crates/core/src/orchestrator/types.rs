use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{PointingCommand, Vec3};

/// Assistance levels, ordered by how much help they give.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssistLevel {
    /// Verbal reminder only.
    L1,
    /// Verbal reminder plus a beckoning gesture.
    L2,
    /// Navigation, pointing and stepwise guidance.
    L3,
}

impl AssistLevel {
    pub fn next(self) -> Option<AssistLevel> {
        match self {
            AssistLevel::L1 => Some(AssistLevel::L2),
            AssistLevel::L2 => Some(AssistLevel::L3),
            AssistLevel::L3 => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GuidanceStep {
    LocateBottle,
    OpenBottle,
    TakePills,
    DrinkWater,
    ConfirmIntake,
}

impl GuidanceStep {
    pub const ALL: [GuidanceStep; 5] =
        [GuidanceStep::LocateBottle, GuidanceStep::OpenBottle, GuidanceStep::TakePills, GuidanceStep::DrinkWater, GuidanceStep::ConfirmIntake];

    pub fn next(self) -> Option<GuidanceStep> {
        let k = self as usize;
        GuidanceStep::ALL.get(k + 1).copied()
    }

    /// The physical action that completes this step.
    pub fn action(self) -> UserActionKind {
        match self {
            GuidanceStep::LocateBottle => UserActionKind::PicksUpBottle,
            GuidanceStep::OpenBottle => UserActionKind::OpensBottle,
            GuidanceStep::TakePills => UserActionKind::TakesPills,
            GuidanceStep::DrinkWater => UserActionKind::DrinksWater,
            GuidanceStep::ConfirmIntake => UserActionKind::ConfirmedIntake,
        }
    }

    pub fn prompt(self) -> &'static str {
        match self {
            GuidanceStep::LocateBottle => "Please pick up your pill bottle.",
            GuidanceStep::OpenBottle => "Now open the bottle.",
            GuidanceStep::TakePills => "Take the prescribed number of pills.",
            GuidanceStep::DrinkWater => "Drink some water to swallow them.",
            GuidanceStep::ConfirmIntake => "Have you taken your medicine?",
        }
    }

    pub fn rephrase(self) -> &'static str {
        match self {
            GuidanceStep::LocateBottle => "Your pill bottle is close by. Can you pick it up?",
            GuidanceStep::OpenBottle => "Let's open the bottle together. Twist the cap.",
            GuidanceStep::TakePills => "Take your pills out of the bottle now.",
            GuidanceStep::DrinkWater => "Take a sip of water, please.",
            GuidanceStep::ConfirmIntake => "Did you take your pills? Please tell me.",
        }
    }
}

/// Orchestrator phases. `AwaitingFinalConfirm` is the `ConfirmIntake` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    Reminding,
    Navigating,
    Scanning,
    Pointing,
    StepGuidance(GuidanceStep),
    AwaitingFinalConfirm,
    Done,
    Aborted,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Aborted)
    }

    /// The guidance step this phase belongs to, if any.
    pub fn step(self) -> Option<GuidanceStep> {
        match self {
            Phase::StepGuidance(s) => Some(s),
            Phase::AwaitingFinalConfirm => Some(GuidanceStep::ConfirmIntake),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntentKind {
    Confirm,
    Deny,
    RepeatRequest,
    HelpRequest,
    Refusal,
    OffTopic,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserActionKind {
    PicksUpBottle,
    OpensBottle,
    TakesPills,
    DrinksWater,
    ConfirmedIntake,
}

/// Orchestrator inputs. Variant order is the tie-break order for events
/// sharing a timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssistEvent {
    ScheduleDue,
    StartNavigationPressed,
    RecordPressed { transcript: String },
    Intent { intent: IntentKind },
    Timeout { phase: Phase },
    /// Target position in the base frame at detection time.
    Found { roi: usize, target: Vec3, true_positive: bool },
    Miss { roi: usize },
    Exhausted,
    RoiUnreachable { roi: usize },
    UserAction { action: UserActionKind },
    GazeConfusion,
}

impl AssistEvent {
    pub fn rank(&self) -> u8 {
        match self {
            AssistEvent::ScheduleDue => 0,
            AssistEvent::StartNavigationPressed => 1,
            AssistEvent::RecordPressed { .. } => 2,
            AssistEvent::Intent { .. } => 3,
            AssistEvent::Timeout { .. } => 4,
            AssistEvent::Found { .. } => 5,
            AssistEvent::Miss { .. } => 6,
            AssistEvent::Exhausted => 7,
            AssistEvent::RoiUnreachable { .. } => 8,
            AssistEvent::UserAction { .. } => 9,
            AssistEvent::GazeConfusion => 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub t: f64,
    pub event: AssistEvent,
}

impl TimedEvent {
    pub fn new(t: f64, event: AssistEvent) -> Self {
        Self { t, event }
    }

    /// Clock order, then declared event order.
    pub fn order(&self, other: &TimedEvent) -> Ordering {
        self.t.total_cmp(&other.t).then(self.event.rank().cmp(&other.event.rank()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gesture {
    Beckon,
    Point { command: PointingCommand },
}

/// Robot outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Speak { text: String },
    Gesture { gesture: Gesture },
    /// Head yaw/pitch toward a base-frame target, radians.
    AlignHead { yaw: f64, pitch: f64 },
    /// In-place base rotation, radians, counterclockwise positive.
    RotateBase { angle: f64 },
    /// Straight base move, meters, forward positive.
    Reposition { distance: f64 },
    NavigateTo { roi: usize },
    NotifyCaregiver,
}

impl Action {
    pub fn is_gesture(&self) -> bool {
        matches!(self, Action::Gesture { .. })
    }

    pub fn is_navigation(&self) -> bool {
        matches!(self, Action::NavigateTo { .. })
    }

    pub fn is_speech(&self) -> bool {
        matches!(self, Action::Speak { .. })
    }
}

/// What the prompt timer should do after a transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimerCmd {
    Keep,
    Start { seconds: f64 },
    Cancel,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_order_is_fixed() {
        let mut s = GuidanceStep::LocateBottle;
        let mut seen = vec![s];
        while let Some(n) = s.next() {
            seen.push(n);
            s = n;
        }
        assert_eq!(seen, GuidanceStep::ALL.to_vec());
    }

    #[test]
    fn levels_are_ordered() {
        assert!(AssistLevel::L1 < AssistLevel::L2 && AssistLevel::L2 < AssistLevel::L3);
        assert_eq!(AssistLevel::L3.next(), None);
    }

    #[test]
    fn equal_times_follow_declared_order() {
        let a = TimedEvent::new(1.0, AssistEvent::Miss { roi: 0 });
        let b = TimedEvent::new(1.0, AssistEvent::Exhausted);
        let c = TimedEvent::new(0.5, AssistEvent::GazeConfusion);
        assert_eq!(a.order(&b), Ordering::Less);
        assert_eq!(c.order(&a), Ordering::Less);
    }

    #[test]
    fn events_serialize_with_kind_tag() {
        let e = AssistEvent::Timeout { phase: Phase::StepGuidance(GuidanceStep::OpenBottle) };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"kind":"timeout","phase":{"StepGuidance":"OpenBottle"}}"#);
        assert_eq!(serde_json::from_str::<AssistEvent>(&s).unwrap(), e);
    }
}
