use serde::{Deserialize, Serialize};

use super::gesture::{gesture_action, target_after, PointingConfig};
use super::types::{Action, AssistEvent, AssistLevel, Gesture, GuidanceStep, IntentKind, Phase, TimedEvent, TimerCmd};
use super::OrchestratorError;
use crate::geometry::Vec3;

/// Active runs the full assistance policy; passive only reminds once and
/// answers record presses with hints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssistMode {
    Active,
    Passive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrchestratorConfig {
    pub mode: AssistMode,
    pub start_level: AssistLevel,
    /// Consecutive reminder failures that trigger escalation.
    pub failure_threshold: u32,
    pub max_repeats: u32,
    /// Seconds to wait for a response to a prompt.
    pub prompt_timeout: f64,
    /// Seconds the pointing gesture is held.
    pub gesture_duration: f64,
    pub max_refusals: u32,
    /// Treat gaze confusion as a request to repeat.
    pub gaze_repeat: bool,
    /// Reject impossible events instead of ignoring them.
    pub strict: bool,
    /// ROI labels in search order; also the hint order in passive mode.
    pub roi_labels: Vec<String>,
    pub pointing: PointingConfig,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            mode: AssistMode::Active,
            start_level: AssistLevel::L1,
            failure_threshold: 2,
            max_repeats: 2,
            prompt_timeout: 20.0,
            gesture_duration: 3.0,
            max_refusals: 2,
            gaze_repeat: false,
            strict: false,
            roi_labels: Vec::new(),
            pointing: PointingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchestratorState {
    pub level: AssistLevel,
    pub phase: Phase,
    /// Failures in the current phase.
    pub failure_count: u32,
    /// Repeats of the current step's prompt.
    pub repeat_count: u32,
    pub refusals: u32,
    pub clock: f64,
    /// Bottle position in the base frame, kept current across the robot's own
    /// pointing motions.
    pub target: Option<Vec3>,
    pub hint_index: usize,
    pub intake_confirmed: bool,
}

impl OrchestratorState {
    pub fn new(cfg: &OrchestratorConfig) -> Self {
        Self {
            level: cfg.start_level,
            phase: Phase::Idle,
            failure_count: 0,
            repeat_count: 0,
            refusals: 0,
            clock: 0.0,
            target: None,
            hint_index: 0,
            intake_confirmed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: OrchestratorState,
    pub actions: Vec<Action>,
    pub timer: TimerCmd,
    /// Set when the event was ignored as impossible in the current phase.
    pub invalid: Option<String>,
}

pub fn reminder_text(level: AssistLevel) -> &'static str {
    match level {
        AssistLevel::L1 => "Time to take your medicine.",
        AssistLevel::L2 => "Time to take your medicine. Please come with me.",
        AssistLevel::L3 => "Time to take your medicine, follow me!",
    }
}

const FIND_PROMPT: &str = "Please find your pill bottle and pick it up.";
const POINT_TEXT: &str = "Your medicine is right here.";
const FOLLOW_TEXT: &str = "Follow me, I will take you to your medicine.";
const REASSURE_TEXT: &str = "That's alright. Your medicine helps you stay well. Shall we try together?";
const DONE_TEXT: &str = "Well done, you have taken your medicine.";
const CAREGIVER_TEXT: &str = "I will let your caregiver know.";
const NOT_FOUND_TEXT: &str = "I could not find your medicine. I will let your caregiver know.";

struct Out<'a> {
    cfg: &'a OrchestratorConfig,
    actions: Vec<Action>,
    timer: TimerCmd,
}

impl Out<'_> {
    fn say(&mut self, text: &str) {
        self.actions.push(Action::Speak { text: text.to_owned() });
    }

    fn wait(&mut self) {
        self.timer = TimerCmd::Start { seconds: self.cfg.prompt_timeout };
    }
}

/// Result of a handler: whether the event was possible in the phase.
type Handled = Result<bool, OrchestratorError>;

/// Applies one event. Impossible events are reported in `invalid` and leave
/// the state untouched apart from the clock, or fail in strict mode.
pub fn step(state: &OrchestratorState, ev: &TimedEvent, cfg: &OrchestratorConfig) -> Result<Transition, OrchestratorError> {
    let reject = |why: String| {
        if cfg.strict {
            Err(OrchestratorError::InvalidEvent { phase: state.phase, reason: why })
        } else {
            let mut s = state.clone();
            s.clock = s.clock.max(ev.t);
            Ok(Transition { state: s, actions: Vec::new(), timer: TimerCmd::Keep, invalid: Some(why) })
        }
    };
    if !(ev.t >= state.clock) {
        return reject(format!("event at {} precedes clock {}", ev.t, state.clock));
    }
    let mut s = state.clone();
    s.clock = ev.t;
    let mut out = Out { cfg, actions: Vec::new(), timer: TimerCmd::Keep };
    let ok = if s.phase.is_terminal() {
        false
    } else {
        match cfg.mode {
            AssistMode::Active => active(&mut s, &ev.event, &mut out)?,
            AssistMode::Passive => passive(&mut s, &ev.event, &mut out),
        }
    };
    if !ok {
        return reject(format!("{:?} not possible in {:?}", ev.event, state.phase));
    }
    Ok(Transition { state: s, actions: out.actions, timer: out.timer, invalid: None })
}

fn is_user_chatter(ev: &AssistEvent) -> bool {
    matches!(
        ev,
        AssistEvent::RecordPressed { .. }
            | AssistEvent::Intent { .. }
            | AssistEvent::UserAction { .. }
            | AssistEvent::StartNavigationPressed
            | AssistEvent::GazeConfusion
    )
}

fn active(s: &mut OrchestratorState, ev: &AssistEvent, out: &mut Out) -> Handled {
    if let AssistEvent::Intent { intent: IntentKind::Refusal } = ev {
        refuse(s, out);
        return Ok(true);
    }
    match s.phase {
        Phase::Idle => match ev {
            AssistEvent::ScheduleDue => {
                enter_reminding(s, out);
                Ok(true)
            }
            AssistEvent::RecordPressed { .. } | AssistEvent::Intent { .. } => Ok(true),
            _ => Ok(false),
        },
        Phase::Reminding => reminding(s, ev, out),
        Phase::Navigating | Phase::Scanning => searching(s, ev, out),
        Phase::Pointing => match ev {
            AssistEvent::Timeout { phase: Phase::Pointing } => {
                enter_step(s, GuidanceStep::LocateBottle, out);
                Ok(true)
            }
            e => Ok(is_user_chatter(e)),
        },
        Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm => guiding(s, ev, out),
        Phase::Done | Phase::Aborted => Ok(false),
    }
}

fn reminding(s: &mut OrchestratorState, ev: &AssistEvent, out: &mut Out) -> Handled {
    match ev {
        AssistEvent::StartNavigationPressed => start_search(s, out, FOLLOW_TEXT),
        AssistEvent::Intent { intent: IntentKind::Confirm } => {
            if s.level == AssistLevel::L3 {
                start_search(s, out, FOLLOW_TEXT);
            } else {
                enter_step(s, GuidanceStep::LocateBottle, out);
            }
        }
        AssistEvent::Intent { intent: IntentKind::HelpRequest } => {
            if s.level == AssistLevel::L3 {
                start_search(s, out, FOLLOW_TEXT);
            } else {
                escalate(s, out)?;
            }
        }
        AssistEvent::Intent { intent: IntentKind::RepeatRequest } => remind(s, out),
        AssistEvent::Timeout { phase: Phase::Reminding }
        | AssistEvent::Intent { intent: IntentKind::Deny | IntentKind::Unknown | IntentKind::OffTopic } => {
            s.failure_count += 1;
            if s.failure_count >= out.cfg.failure_threshold {
                escalate(s, out)?;
            } else {
                remind(s, out);
            }
        }
        AssistEvent::GazeConfusion if out.cfg.gaze_repeat => remind(s, out),
        AssistEvent::RecordPressed { .. } | AssistEvent::UserAction { .. } | AssistEvent::GazeConfusion => {}
        _ => return Ok(false),
    }
    Ok(true)
}

fn searching(s: &mut OrchestratorState, ev: &AssistEvent, out: &mut Out) -> Handled {
    match ev {
        AssistEvent::Found { target, .. } => {
            s.phase = Phase::Pointing;
            s.failure_count = 0;
            out.say(POINT_TEXT);
            let acts = gesture_action(target, &out.cfg.pointing)?;
            s.target = Some(target_after(target, &acts));
            out.actions.extend(acts);
            out.timer = TimerCmd::Start { seconds: out.cfg.gesture_duration };
        }
        AssistEvent::Miss { roi } | AssistEvent::RoiUnreachable { roi } => {
            s.phase = Phase::Scanning;
            if roi + 1 < out.cfg.roi_labels.len() {
                out.actions.push(Action::NavigateTo { roi: roi + 1 });
            }
        }
        AssistEvent::Exhausted => abort(s, out, NOT_FOUND_TEXT),
        e => return Ok(is_user_chatter(e)),
    }
    Ok(true)
}

fn guiding(s: &mut OrchestratorState, ev: &AssistEvent, out: &mut Out) -> Handled {
    let step = s.phase.step().expect("guiding phase has a step");
    match ev {
        AssistEvent::Intent { intent: IntentKind::Confirm } => advance(s, step, out),
        AssistEvent::Intent { intent: IntentKind::HelpRequest } if s.level < AssistLevel::L3 => escalate(s, out)?,
        AssistEvent::Timeout { phase } if *phase == s.phase => repeat_or_escalate(s, out)?,
        AssistEvent::Intent { .. } => repeat_or_escalate(s, out)?,
        AssistEvent::GazeConfusion if out.cfg.gaze_repeat => repeat_or_escalate(s, out)?,
        AssistEvent::StartNavigationPressed if step == GuidanceStep::LocateBottle && s.target.is_none() => {
            start_search(s, out, FOLLOW_TEXT)
        }
        AssistEvent::RecordPressed { .. } | AssistEvent::UserAction { .. } | AssistEvent::GazeConfusion | AssistEvent::StartNavigationPressed => {}
        _ => return Ok(false),
    }
    Ok(true)
}

fn passive(s: &mut OrchestratorState, ev: &AssistEvent, out: &mut Out) -> bool {
    match (s.phase, ev) {
        (Phase::Idle, AssistEvent::ScheduleDue) => {
            s.phase = Phase::StepGuidance(GuidanceStep::LocateBottle);
            out.say(reminder_text(AssistLevel::L1));
            true
        }
        (Phase::Idle, AssistEvent::RecordPressed { .. } | AssistEvent::Intent { .. }) => true,
        (Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm, AssistEvent::UserAction { action }) => {
            let step = s.phase.step().expect("guiding phase has a step");
            if *action == step.action() {
                match step.next() {
                    Some(GuidanceStep::ConfirmIntake) => s.phase = Phase::AwaitingFinalConfirm,
                    Some(n) => s.phase = Phase::StepGuidance(n),
                    None => finish(s, out),
                }
            }
            true
        }
        (Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm, AssistEvent::RecordPressed { .. }) => {
            let step = s.phase.step().expect("guiding phase has a step");
            let labels = &out.cfg.roi_labels;
            let text = if step == GuidanceStep::LocateBottle && !labels.is_empty() {
                let label = &labels[s.hint_index % labels.len()];
                s.hint_index += 1;
                format!("It might be on the {label}.")
            } else if step == GuidanceStep::LocateBottle {
                "Take your time, you are doing well.".to_owned()
            } else {
                format!("You are doing well. {}", step.prompt())
            };
            out.say(&text);
            true
        }
        (Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm, AssistEvent::Intent { .. } | AssistEvent::GazeConfusion) => true,
        _ => false,
    }
}

fn remind(s: &mut OrchestratorState, out: &mut Out) {
    out.say(reminder_text(s.level));
    if s.level >= AssistLevel::L2 {
        out.actions.push(Action::Gesture { gesture: Gesture::Beckon });
    }
    out.wait();
}

fn enter_reminding(s: &mut OrchestratorState, out: &mut Out) {
    s.phase = Phase::Reminding;
    s.failure_count = 0;
    remind(s, out);
}

fn start_search(s: &mut OrchestratorState, out: &mut Out, text: &str) {
    s.phase = Phase::Navigating;
    s.failure_count = 0;
    s.repeat_count = 0;
    out.say(text);
    out.actions.push(Action::NavigateTo { roi: 0 });
    out.timer = TimerCmd::Cancel;
}

fn enter_step(s: &mut OrchestratorState, step: GuidanceStep, out: &mut Out) {
    s.phase = if step == GuidanceStep::ConfirmIntake { Phase::AwaitingFinalConfirm } else { Phase::StepGuidance(step) };
    s.failure_count = 0;
    s.repeat_count = 0;
    let text = if step == GuidanceStep::LocateBottle && s.target.is_none() { FIND_PROMPT } else { step.prompt() };
    out.say(text);
    out.wait();
}

fn advance(s: &mut OrchestratorState, step: GuidanceStep, out: &mut Out) {
    match step.next() {
        Some(n) => enter_step(s, n, out),
        None => finish(s, out),
    }
}

fn finish(s: &mut OrchestratorState, out: &mut Out) {
    s.phase = Phase::Done;
    s.intake_confirmed = true;
    out.say(DONE_TEXT);
    out.timer = TimerCmd::Cancel;
}

fn abort(s: &mut OrchestratorState, out: &mut Out, text: &str) {
    s.phase = Phase::Aborted;
    out.say(text);
    out.actions.push(Action::NotifyCaregiver);
    out.timer = TimerCmd::Cancel;
}

fn refuse(s: &mut OrchestratorState, out: &mut Out) {
    s.refusals += 1;
    if s.refusals >= out.cfg.max_refusals {
        abort(s, out, CAREGIVER_TEXT);
        return;
    }
    out.say(REASSURE_TEXT);
    if matches!(s.phase, Phase::Reminding | Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm) {
        out.wait();
    }
}

fn repeat_or_escalate(s: &mut OrchestratorState, out: &mut Out) -> Result<(), OrchestratorError> {
    let step = s.phase.step().expect("guiding phase has a step");
    if s.repeat_count < out.cfg.max_repeats {
        s.repeat_count += 1;
        out.say(step.rephrase());
        out.wait();
        Ok(())
    } else {
        escalate(s, out)
    }
}

/// Raises the level by one, or aborts when already at the top.
fn escalate(s: &mut OrchestratorState, out: &mut Out) -> Result<(), OrchestratorError> {
    let Some(next) = s.level.next() else {
        abort(s, out, CAREGIVER_TEXT);
        return Ok(());
    };
    s.level = next;
    s.failure_count = 0;
    s.repeat_count = 0;
    match s.phase {
        Phase::Reminding if next == AssistLevel::L3 => start_search(s, out, reminder_text(AssistLevel::L3)),
        Phase::Reminding => remind(s, out),
        Phase::StepGuidance(GuidanceStep::LocateBottle) if next == AssistLevel::L3 && s.target.is_none() => {
            start_search(s, out, reminder_text(AssistLevel::L3))
        }
        _ => {
            let step = s.phase.step().expect("escalation happens while reminding or guiding");
            let text = if step == GuidanceStep::LocateBottle && s.target.is_none() { FIND_PROMPT } else { step.prompt() };
            out.say(text);
            match (next, s.target) {
                (AssistLevel::L3, Some(t)) => {
                    let acts = gesture_action(&t, &out.cfg.pointing)?;
                    s.target = Some(target_after(&t, &acts));
                    out.actions.extend(acts);
                }
                _ => out.actions.push(Action::Gesture { gesture: Gesture::Beckon }),
            }
            out.wait();
        }
    }
    Ok(())
}
