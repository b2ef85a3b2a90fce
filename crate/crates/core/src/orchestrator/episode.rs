use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::intent::IntentBackend;
use super::log::{LogEnd, LogEvent, LogHeader, Outcome, SessionLog, LOG_SCHEMA_VERSION};
use super::machine::{step, AssistMode, OrchestratorConfig, OrchestratorState};
use super::types::{Action, AssistEvent, AssistLevel, Gesture, GuidanceStep, Phase, TimedEvent, TimerCmd, UserActionKind};
use super::OrchestratorError;
use crate::geometry::{localize_target, LocalizationConfig};
use crate::navigation::{visit_roi, Costmap, SearchConfig, SearchContext, SearchEvent};
use crate::rng::{SimRng, Stream};
use crate::usersim::{
    gaze_stream, respond, sample_latency, search_behavior, ConfusionEvent, GazeConfig, GazeSample, PromptKind, Reply,
    SearchMode, Timeline, UserProfile,
};
use crate::worldsim::{wrap_angle, DepthCamera, DetectorModel, RobotState, Scene};

/// The physical world an episode runs in.
pub struct World<'a> {
    pub scene: &'a Scene,
    pub costmap: &'a Costmap,
    pub camera: &'a DepthCamera,
    pub detector: &'a DetectorModel,
    pub search: &'a SearchConfig,
    pub localization: LocalizationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// When the medication reminder fires, seconds.
    pub start_time: f64,
    /// Episode time limit measured from `start_time`.
    pub cap: f64,
    /// Time from seeing the bottle to picking it up, seconds.
    pub reach_time: f64,
    pub depth_noise: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { start_time: 0.0, cap: 600.0, reach_time: 1.5, depth_noise: true }
    }
}

/// Identifies the run in the log header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeMeta {
    pub condition: String,
    pub seed: u64,
    pub scenario_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub log: SessionLog,
    pub timeline: Timeline,
    pub gaze: Vec<GazeSample>,
    /// Confusion runs inserted into the gaze stream.
    pub confusion: Vec<ConfusionEvent>,
    pub final_state: OrchestratorState,
    pub robot: RobotState,
}

/// Delivery condition for a queued event.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Guard {
    Always,
    /// Only if the prompt timer has not been restarted or cancelled since.
    Timer(u64),
    /// Only if the orchestrator is still in this phase.
    Phase(Phase),
}

struct Queued {
    ev: TimedEvent,
    seq: u64,
    guard: Guard,
}

impl Queued {
    fn key(&self, other: &Self) -> Ordering {
        self.ev.order(&other.ev).then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key(self)
    }
}

#[derive(Default)]
struct Queue {
    heap: BinaryHeap<Queued>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, t: f64, event: AssistEvent, guard: Guard) {
        self.heap.push(Queued { ev: TimedEvent::new(t, event), seq: self.seq, guard });
        self.seq += 1;
    }
}

fn confirm_text(step: GuidanceStep) -> &'static str {
    match step {
        GuidanceStep::LocateBottle => "Got it.",
        GuidanceStep::OpenBottle => "Okay, it is open.",
        GuidanceStep::TakePills => "Done, I took them.",
        GuidanceStep::DrinkWater => "Finished.",
        GuidanceStep::ConfirmIntake => "Yes, I took my pills.",
    }
}

const ACCEPT_TEXT: &str = "Okay, I'm coming.";
const DECLINE_TEXT: &str = "No, not yet.";
const CANNOT_TEXT: &str = "I can't do it.";
const REFUSE_TEXT: &str = "I don't want to take it.";
const WHERE_TEXT: &str = "Where is my medicine?";
const STUCK_TEXT: &str = "Help me, what do I do now?";

/// The simulated participant's side of the loop.
struct Participant<'a> {
    profile: &'a UserProfile,
    reach: f64,
    rng: SimRng,
    search_rng: SimRng,
    locate_time: Option<f64>,
    /// Phase whose prompt the user is already working on.
    busy: Option<Phase>,
    help_used: u32,
}

impl Participant<'_> {
    fn locate_by(&mut self, t: f64) {
        self.locate_time = Some(self.locate_time.map_or(t, |l| l.min(t)));
    }

    fn unaided_from(&mut self, t: f64) -> f64 {
        if self.locate_time.is_none() {
            let d = search_behavior(self.profile, SearchMode::Unaided, &mut self.search_rng);
            self.locate_by(t + d);
        }
        self.locate_time.expect("set above")
    }

    fn say(&self, q: &mut Queue, t: f64, text: &str, phase: Phase) {
        q.push(t, AssistEvent::RecordPressed { transcript: text.to_owned() }, Guard::Phase(phase));
    }

    fn active(&mut self, t: f64, delivered: &AssistEvent, after: &OrchestratorState, actions: &[Action], q: &mut Queue) {
        if self.busy.is_some_and(|p| p != after.phase) {
            self.busy = None;
        }
        if actions.iter().any(|a| matches!(a, Action::Gesture { gesture: Gesture::Point { .. } })) {
            let guided = matches!(delivered, AssistEvent::Found { true_positive: true, .. })
                || (!matches!(delivered, AssistEvent::Found { .. }) && after.target.is_some());
            if guided {
                let d = search_behavior(self.profile, SearchMode::Guided, &mut self.search_rng);
                self.locate_by(t + d);
            } else {
                self.unaided_from(t);
            }
        }
        if !actions.iter().any(Action::is_speech) || self.busy == Some(after.phase) {
            return;
        }
        let phase = after.phase;
        match phase {
            Phase::Reminding => match respond(self.profile, PromptKind::Reminder(after.level), &mut self.rng) {
                Some(r) => match r.reply {
                    Reply::Accept if after.level == AssistLevel::L3 => {
                        q.push(t + r.delay, AssistEvent::StartNavigationPressed, Guard::Phase(phase))
                    }
                    Reply::Accept | Reply::Act(_) => self.say(q, t + r.delay, ACCEPT_TEXT, phase),
                    Reply::Decline => self.say(q, t + r.delay, DECLINE_TEXT, phase),
                    Reply::Refuse => self.say(q, t + r.delay, REFUSE_TEXT, phase),
                },
                None => {}
            },
            Phase::StepGuidance(_) | Phase::AwaitingFinalConfirm => {
                let step = phase.step().expect("guiding phase");
                let Some(r) = respond(self.profile, PromptKind::Step(step), &mut self.rng) else {
                    return;
                };
                match r.reply {
                    Reply::Act(action) => {
                        let mut at = t + r.delay;
                        if step == GuidanceStep::LocateBottle {
                            at = at.max(self.unaided_from(t) + self.reach);
                        }
                        q.push(at, AssistEvent::UserAction { action }, Guard::Phase(phase));
                        self.say(q, at + self.profile.confirm_delay, confirm_text(step), phase);
                        self.busy = Some(phase);
                    }
                    Reply::Accept => self.say(q, t + r.delay, ACCEPT_TEXT, phase),
                    Reply::Decline => self.say(q, t + r.delay, CANNOT_TEXT, phase),
                    Reply::Refuse => self.say(q, t + r.delay, REFUSE_TEXT, phase),
                }
            }
            _ => {}
        }
    }

    fn passive(&mut self, t: f64, delivered: &AssistEvent, after: &OrchestratorState, q: &mut Queue) {
        let phase = after.phase;
        match delivered {
            AssistEvent::ScheduleDue => {
                let Some(r) = respond(self.profile, PromptKind::Reminder(AssistLevel::L1), &mut self.rng) else {
                    return;
                };
                if r.reply != Reply::Accept {
                    return;
                }
                let start = t + r.delay;
                let found = self.unaided_from(start);
                let mut k = 1;
                while self.help_used < self.profile.max_help_requests {
                    let at = start + k as f64 * self.profile.help_interval;
                    if at >= found {
                        break;
                    }
                    self.say(q, at, WHERE_TEXT, phase);
                    self.help_used += 1;
                    k += 1;
                }
                q.push(found + self.reach, AssistEvent::UserAction { action: UserActionKind::PicksUpBottle }, Guard::Phase(phase));
            }
            AssistEvent::UserAction { .. } => {
                let Some(step) = phase.step() else { return };
                let r = respond(self.profile, PromptKind::Step(step), &mut self.rng);
                let mut at = t + r.as_ref().map_or_else(|| sample_latency(self.profile, &mut self.rng), |r| r.delay);
                if !matches!(r, Some(ref r) if matches!(r.reply, Reply::Act(_))) {
                    // Stuck: hesitate, maybe ask, then manage it anyway.
                    if self.help_used < self.profile.max_help_requests {
                        self.say(q, at, STUCK_TEXT, phase);
                        self.help_used += 1;
                    }
                    at += sample_latency(self.profile, &mut self.rng);
                }
                q.push(at, AssistEvent::UserAction { action: step.action() }, Guard::Phase(phase));
            }
            _ => {}
        }
    }
}

/// Runs one medication episode to completion, abort, or the time cap.
///
/// Events are processed in time order, ties broken by event kind and then
/// insertion order. Navigation runs synchronously when requested and its
/// result is delivered after the simulated travel and scan time.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    world: &World<'_>,
    cfg: &OrchestratorConfig,
    profile: &UserProfile,
    gaze_cfg: &GazeConfig,
    ep: &EpisodeConfig,
    backend: &dyn IntentBackend,
    robot: RobotState,
    meta: &EpisodeMeta,
) -> Result<Episode, OrchestratorError> {
    if cfg.mode == AssistMode::Active && cfg.roi_labels.len() != world.scene.rois.len() {
        return Err(OrchestratorError::InvalidConfig(format!(
            "{} ROI labels for {} ROIs",
            cfg.roi_labels.len(),
            world.scene.rois.len()
        )));
    }
    if !(ep.cap > 0.0 && ep.cap.is_finite()) {
        return Err(OrchestratorError::InvalidConfig(format!("episode cap must be positive, got {}", ep.cap)));
    }
    let seed = meta.seed;
    let mut robot = robot;
    let mut det_rng = SimRng::new(seed, Stream::Detector);
    let mut noise_rng = SimRng::new(seed, Stream::DepthNoise);
    let mut user = Participant {
        profile,
        reach: ep.reach_time,
        rng: SimRng::new(seed, Stream::User),
        search_rng: SimRng::new(seed, Stream::Search),
        locate_time: None,
        busy: None,
        help_used: 0,
    };

    let end_limit = ep.start_time + ep.cap;
    let mut state = OrchestratorState::new(cfg);
    state.clock = ep.start_time;
    let mut q = Queue::default();
    q.push(ep.start_time, AssistEvent::ScheduleDue, Guard::Always);
    let mut timer_gen = 0u64;
    let mut events = Vec::new();
    let mut timeline = Timeline::default();
    let mut end_t = end_limit;

    while let Some(item) = q.heap.pop() {
        let t = item.ev.t;
        if t > end_limit {
            break;
        }
        let live = match item.guard {
            Guard::Always => true,
            Guard::Timer(g) => g == timer_gen,
            Guard::Phase(p) => p == state.phase,
        };
        if !live {
            continue;
        }
        let tr = step(&state, &item.ev, cfg)?;
        match tr.timer {
            TimerCmd::Keep => {}
            TimerCmd::Start { seconds } => {
                timer_gen += 1;
                q.push(t + seconds, AssistEvent::Timeout { phase: tr.state.phase }, Guard::Timer(timer_gen));
            }
            TimerCmd::Cancel => timer_gen += 1,
        }
        let mut navigated = false;
        for a in &tr.actions {
            match a {
                Action::Speak { .. } => timeline.prompts.push(t),
                Action::Gesture { gesture: Gesture::Point { .. } } => timeline.pointing.push((t, t + cfg.gesture_duration)),
                Action::RotateBase { angle } => robot.heading = wrap_angle(robot.heading + angle),
                Action::Reposition { distance } => {
                    let (x, y) = (robot.x + distance * robot.heading.cos(), robot.y + distance * robot.heading.sin());
                    if !world.scene.grid.blocks(x, y) {
                        robot.x = x;
                        robot.y = y;
                    }
                }
                Action::NavigateTo { roi } => {
                    navigated = true;
                    let mut ctx = SearchContext {
                        scene: world.scene,
                        costmap: world.costmap,
                        camera: world.camera,
                        detector: world.detector,
                        config: world.search,
                        detector_rng: &mut det_rng,
                        noise_rng: if ep.depth_noise { Some(&mut noise_rng) } else { None },
                    };
                    let visit = visit_roi(&mut ctx, &mut robot, *roi);
                    let ev = match visit.event {
                        SearchEvent::Found { roi, hit } => {
                            match localize_target(
                                &hit.depth,
                                &hit.detection.bbox,
                                &world.camera.intrinsics,
                                &hit.base_from_camera,
                                &world.localization,
                            ) {
                                Ok(est) => AssistEvent::Found {
                                    roi,
                                    target: est.centroid,
                                    true_positive: hit.detection.true_positive,
                                },
                                Err(_) => AssistEvent::Miss { roi },
                            }
                        }
                        SearchEvent::Miss { roi } => AssistEvent::Miss { roi },
                        SearchEvent::RoiUnreachable { roi } => AssistEvent::RoiUnreachable { roi },
                        SearchEvent::Exhausted => AssistEvent::Exhausted,
                    };
                    q.push(t + visit.duration, ev, Guard::Always);
                }
                Action::Gesture { .. } | Action::AlignHead { .. } | Action::NotifyCaregiver => {}
            }
        }
        if tr.invalid.is_none() {
            match &item.ev.event {
                AssistEvent::Miss { .. } | AssistEvent::RoiUnreachable { .. } if !navigated => {
                    q.push(t, AssistEvent::Exhausted, Guard::Always);
                }
                AssistEvent::RecordPressed { transcript } => {
                    let (intent, latency) = backend.classify(transcript);
                    q.push(t + latency, AssistEvent::Intent { intent }, Guard::Phase(tr.state.phase));
                }
                AssistEvent::UserAction { .. } => timeline.actions.push(t),
                _ => {}
            }
            match cfg.mode {
                AssistMode::Active => user.active(t, &item.ev.event, &tr.state, &tr.actions, &mut q),
                AssistMode::Passive => user.passive(t, &item.ev.event, &tr.state, &mut q),
            }
        }
        events.push(LogEvent {
            seq: events.len() as u64,
            t,
            event: item.ev.event,
            phase: tr.state.phase,
            level: tr.state.level,
            actions: tr.actions,
            invalid: tr.invalid,
        });
        state = tr.state;
        if state.phase.is_terminal() {
            end_t = t;
            break;
        }
    }

    let outcome = match state.phase {
        Phase::Done => Outcome::Done,
        Phase::Aborted => Outcome::Aborted,
        _ => Outcome::Cap,
    };
    let log = SessionLog {
        header: LogHeader {
            schema_version: LOG_SCHEMA_VERSION,
            condition: meta.condition.clone(),
            seed,
            scenario_hash: meta.scenario_hash.clone(),
            mode: cfg.mode,
            start_level: cfg.start_level,
            start_time: ep.start_time,
            cap: ep.cap,
        },
        events,
        end: LogEnd { t: end_t, phase: state.phase, level: state.level, outcome },
    };

    // Gaze is synthesized over [start, end) and shifted back to absolute time.
    let rel = |x: f64| x - ep.start_time;
    let timeline = Timeline {
        duration: rel(end_t),
        locate_time: user.locate_time.filter(|&l| l < end_t).map(rel),
        prompts: timeline.prompts.into_iter().map(rel).collect(),
        pointing: timeline.pointing.into_iter().map(|(a, b)| (rel(a), rel(b))).collect(),
        actions: timeline.actions.into_iter().map(rel).collect(),
    };
    let mut gaze_rng = SimRng::new(seed, Stream::Gaze);
    let (mut gaze, mut confusion) = gaze_stream(&timeline, profile, gaze_cfg, &mut gaze_rng);
    if ep.start_time != 0.0 {
        for s in &mut gaze {
            s.timestamp += ep.start_time;
        }
        for c in &mut confusion {
            c.start += ep.start_time;
            c.end += ep.start_time;
        }
    }
    Ok(Episode { log, timeline, gaze, confusion, final_state: state, robot })
}
