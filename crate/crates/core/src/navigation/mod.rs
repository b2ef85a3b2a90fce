//! Costmap, global A* planning, Dynamic Window local planning, the navigate
//! loop that drives the simulated base, and sequential ROI search.

mod costmap;
mod dwa;
mod planner;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use costmap::{build_costmap, inflated_cost, Costmap, InflationParams, CLEARANCE_RANGE, INSCRIBED, LETHAL};
pub use dwa::{
    arc_times, dwa_step, dynamic_window, evaluate_arc, heading_score, lookahead_point, normalize, sample_lattice, ArcEval, DwaChoice,
    DwaParams, Window, SCORE_TIE_EPS,
};
pub use planner::{edge_weight_units, plan_cells, plan_global, successors, GlobalPath, COST_SCALE};

use crate::rng::SimRng;
use crate::worldsim::{scan_at_roi, step_kinematics, wrap_angle, DepthCamera, DetectorModel, PanSchedule, RenderMode, RobotState, ScanHit, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("no path to goal")]
    NoPath,
    #[error("start or goal lies in a lethal cell")]
    LethalEndpoint,
    #[error("start or goal lies off the map")]
    OffMap,
    #[error("every sampled arc collides")]
    AllBlocked,
    #[error("path has no waypoints")]
    EmptyPath,
    #[error("invalid planner parameters")]
    InvalidParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub dwa: DwaParams,
    pub dt: f64,
    pub arrival_distance: f64,
    pub arrival_angle: f64,
    /// Longest in-place rotation before replanning after `AllBlocked`, seconds.
    pub recovery_time: f64,
    pub max_retries: u32,
    /// Added to the tick budget on top of four times the path length at top speed.
    pub slack_time: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            dwa: DwaParams::default(),
            dt: 0.1,
            arrival_distance: 0.3,
            arrival_angle: 15f64.to_radians(),
            recovery_time: 2.0,
            max_retries: 1,
            slack_time: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavStatus {
    Arrived,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavOutcome {
    pub status: NavStatus,
    pub ticks: u64,
    pub elapsed: f64,
    pub collisions: u32,
    pub replans: u32,
    /// Base pose after every tick.
    pub trajectory: Vec<(f64, f64, f64)>,
}

/// Drives the robot to `goal = (x, y, heading)`: plan once, follow with DWA,
/// then turn in place to the goal heading. Recovers from `AllBlocked` by
/// rotating and replanning up to `max_retries` times.
pub fn navigate_to(state: &mut RobotState, goal: (f64, f64, f64), scene: &Scene, cm: &Costmap, cfg: &NavConfig) -> NavOutcome {
    let mut out = NavOutcome { status: NavStatus::Unreachable, ticks: 0, elapsed: 0.0, collisions: 0, replans: 0, trajectory: Vec::new() };
    let Ok(mut path) = plan_global(cm, (state.x, state.y), (goal.0, goal.1)) else {
        return out;
    };
    // Replace the last cell center with the exact goal point.
    if let Some(last) = path.waypoints.last_mut() {
        *last = (goal.0, goal.1);
    }
    let budget = ((4.0 * path.length() / cfg.dwa.v_max + cfg.slack_time) / cfg.dt).ceil() as u64;
    let mut retries = 0;
    let mut recovering = 0u64;
    let recovery_ticks = (cfg.recovery_time / cfg.dt).round() as u64;
    let mut rotating = false;

    while out.ticks < budget {
        let dist = (goal.0 - state.x).hypot(goal.1 - state.y);
        let cmd = if rotating || dist <= cfg.arrival_distance {
            rotating = true;
            let err = wrap_angle(goal.2 - state.heading);
            if err.abs() <= cfg.arrival_angle && state.v.abs() < 1e-9 {
                out.status = NavStatus::Arrived;
                break;
            }
            let v = (state.v - cfg.dwa.acc_v * cfg.dt).max(0.0);
            let want = (2.0 * err).clamp(cfg.dwa.omega_min, cfg.dwa.omega_max);
            let dw = cfg.dwa.acc_omega * cfg.dt;
            let omega = if err.abs() <= cfg.arrival_angle { 0.0 } else { want.clamp(state.omega - dw, state.omega + dw) };
            (v, omega)
        } else if recovering > 0 {
            recovering -= 1;
            if recovering == 0 {
                match plan_global(cm, (state.x, state.y), (goal.0, goal.1)) {
                    Ok(mut p) => {
                        if let Some(last) = p.waypoints.last_mut() {
                            *last = (goal.0, goal.1);
                        }
                        path = p;
                        out.replans += 1;
                    }
                    Err(_) => break,
                }
            }
            (0.0, cfg.dwa.omega_max)
        } else {
            match dwa_step(state, &path, cm, &cfg.dwa, cfg.dt) {
                Ok(c) => (c.v, c.omega),
                Err(_) => {
                    if retries >= cfg.max_retries {
                        break;
                    }
                    retries += 1;
                    recovering = recovery_ticks.max(1);
                    continue;
                }
            }
        };
        let step = step_kinematics(state, cmd, cfg.dt, &scene.grid);
        if step.collided {
            out.collisions += 1;
        }
        *state = step.state;
        out.ticks += 1;
        out.trajectory.push((state.x, state.y, state.heading));
    }
    if out.status != NavStatus::Arrived {
        state.v = 0.0;
        state.omega = 0.0;
    }
    out.elapsed = out.ticks as f64 * cfg.dt;
    out
}

/// Timing and sensing settings for ROI search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub nav: NavConfig,
    pub pan_schedule: PanSchedule,
    pub render_mode: RenderMode,
    /// Pause on arrival before scanning, seconds.
    pub pause: f64,
    /// Time per scan frame, seconds.
    pub frame_time: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { nav: NavConfig::default(), pan_schedule: PanSchedule::default(), render_mode: RenderMode::default(), pause: 1.0, frame_time: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchEvent {
    Found { roi: usize, hit: Box<ScanHit> },
    Miss { roi: usize },
    RoiUnreachable { roi: usize },
    Exhausted,
}

impl SearchEvent {
    pub fn roi(&self) -> Option<usize> {
        match self {
            SearchEvent::Found { roi, .. } | SearchEvent::Miss { roi } | SearchEvent::RoiUnreachable { roi } => Some(*roi),
            SearchEvent::Exhausted => None,
        }
    }
}

/// One ROI visit and the simulated time it took.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiVisit {
    pub event: SearchEvent,
    pub duration: f64,
    pub nav: Option<NavOutcome>,
}

/// Per-episode sensing resources used while searching.
pub struct SearchContext<'a> {
    pub scene: &'a Scene,
    pub costmap: &'a Costmap,
    pub camera: &'a DepthCamera,
    pub detector: &'a DetectorModel,
    pub config: &'a SearchConfig,
    pub detector_rng: &'a mut SimRng,
    pub noise_rng: Option<&'a mut SimRng>,
}

/// Navigates to ROI `roi`, pauses, and scans.
pub fn visit_roi(ctx: &mut SearchContext<'_>, state: &mut RobotState, roi: usize) -> RoiVisit {
    let r = &ctx.scene.rois[roi];
    let nav = navigate_to(state, (r.x, r.y, r.heading), ctx.scene, ctx.costmap, &ctx.config.nav);
    if nav.status != NavStatus::Arrived {
        return RoiVisit { event: SearchEvent::RoiUnreachable { roi }, duration: nav.elapsed, nav: Some(nav) };
    }
    let report = scan_at_roi(
        ctx.scene,
        state,
        ctx.camera,
        ctx.detector,
        &ctx.config.pan_schedule,
        ctx.config.render_mode,
        ctx.detector_rng,
        ctx.noise_rng.as_deref_mut(),
    );
    let duration = nav.elapsed + ctx.config.pause + ctx.config.frame_time * report.visited.len() as f64;
    let event = match report.hit {
        Some(hit) => SearchEvent::Found { roi, hit: Box::new(hit) },
        None => SearchEvent::Miss { roi },
    };
    RoiVisit { event, duration, nav: Some(nav) }
}

/// Visits ROIs in order until one yields a detection, then stops; emits
/// `Exhausted` once after the last ROI misses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiSequencer {
    next: usize,
    count: usize,
    finished: bool,
}

impl RoiSequencer {
    pub fn new(count: usize) -> Self {
        Self { next: 0, count, finished: count == 0 }
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    /// Index of the ROI the next call to `advance` will visit.
    pub fn upcoming(&self) -> Option<usize> {
        (!self.finished && self.next < self.count).then_some(self.next)
    }

    pub fn advance(&mut self, ctx: &mut SearchContext<'_>, state: &mut RobotState) -> Option<RoiVisit> {
        if self.finished {
            return None;
        }
        if self.next >= self.count {
            self.finished = true;
            return Some(RoiVisit { event: SearchEvent::Exhausted, duration: 0.0, nav: None });
        }
        let visit = visit_roi(ctx, state, self.next);
        self.next += 1;
        if matches!(visit.event, SearchEvent::Found { .. }) {
            self.finished = true;
        }
        Some(visit)
    }

    /// Runs the whole search.
    pub fn run(mut self, ctx: &mut SearchContext<'_>, state: &mut RobotState) -> Vec<RoiVisit> {
        std::iter::from_fn(|| self.advance(ctx, state)).collect()
    }
}

/// Absolute heading difference, radians in `[0, π]`.
pub fn heading_error(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs().min(PI)
}
