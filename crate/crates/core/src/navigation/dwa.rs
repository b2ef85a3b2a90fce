use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::costmap::{Costmap, LETHAL};
use super::planner::GlobalPath;
use super::NavError;
use crate::worldsim::{unicycle_pose, wrap_angle, RobotState};

/// Score differences below this count as ties.
pub const SCORE_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaParams {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub acc_v: f64,
    pub acc_omega: f64,
    pub n_v: usize,
    pub n_omega: usize,
    pub horizon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Distance along the path to the point the heading term aims at.
    pub lookahead: f64,
    /// Free distance along an arc's curve beyond this counts as fully clear.
    pub clearance_cap: f64,
}

impl Default for DwaParams {
    fn default() -> Self {
        Self {
            v_min: 0.0,
            v_max: 0.5,
            omega_min: -1.0,
            omega_max: 1.0,
            acc_v: 0.5,
            acc_omega: 1.0,
            n_v: 11,
            n_omega: 21,
            horizon: 2.0,
            alpha: 0.8,
            beta: 0.1,
            gamma: 0.1,
            lookahead: 0.75,
            clearance_cap: 1.0,
        }
    }
}

impl DwaParams {
    pub fn validate(&self) -> Result<(), NavError> {
        let ok = self.v_min <= self.v_max
            && self.omega_min <= self.omega_max
            && self.acc_v > 0.0
            && self.acc_omega > 0.0
            && self.n_v >= 2
            && self.n_omega >= 2
            && self.horizon > 0.0
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.gamma >= 0.0
            && self.lookahead > 0.0
            && self.clearance_cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NavError::InvalidParams)
        }
    }
}

/// Velocity bounds reachable within one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub v_lo: f64,
    pub v_hi: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

/// The dynamic window, clipped to the parameter bounds. The forward bound is
/// further limited so the robot can still brake to a stop at the path's end.
pub fn dynamic_window(state: &RobotState, p: &DwaParams, dt: f64, dist_to_goal: f64) -> Window {
    let v_lo = (state.v - p.acc_v * dt).max(p.v_min).min(p.v_max);
    let v_hi = (state.v + p.acc_v * dt).min(p.v_max).min((2.0 * p.acc_v * dist_to_goal).sqrt()).max(v_lo);
    let omega_lo = (state.omega - p.acc_omega * dt).max(p.omega_min).min(p.omega_max);
    let omega_hi = (state.omega + p.acc_omega * dt).min(p.omega_max).max(omega_lo);
    Window { v_lo, v_hi, omega_lo, omega_hi }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi - lo <= 0.0 {
        return vec![lo];
    }
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

/// `n_v × n_omega` lattice over the window, `v`-major. A collapsed axis
/// contributes a single value.
pub fn sample_lattice(w: &Window, p: &DwaParams) -> Vec<(f64, f64)> {
    let vs = axis(w.v_lo, w.v_hi, p.n_v);
    let ws = axis(w.omega_lo, w.omega_hi, p.n_omega);
    vs.iter().flat_map(|v| ws.iter().map(move |o| (*v, *o))).collect()
}

/// Result of simulating one candidate arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcEval {
    pub end: (f64, f64, f64),
    /// Free travel along the arc's curve before it would come too close
    /// to an obstacle, capped. Pure rotations get the cap.
    pub clearance: f64,
}

/// Arc sample times, at most half a cell of travel apart.
pub fn arc_times(v: f64, horizon: f64, res: f64) -> Vec<f64> {
    let n = ((v.abs() * horizon / (0.5 * res)).ceil() as usize).max(1);
    (1..=n).map(|k| horizon * k as f64 / n as f64).collect()
}

/// Simulates `(v, ω)` for the horizon. `None` if a sample leaves the map,
/// enters a lethal cell, or comes closer to an obstacle than the robot
/// radius (or than the current clearance, when already inside it).
pub fn evaluate_arc(state: &RobotState, v: f64, omega: f64, cm: &Costmap, p: &DwaParams) -> Option<ArcEval> {
    let floor = cm.inflation.robot_radius.min(cm.clearance_at(state.x, state.y));
    let unsafe_at = |pose: (f64, f64, f64)| match cm.world_to_cell(pose.0, pose.1) {
        Some((i, j)) => cm.cost(i, j) == LETHAL || cm.distance(i, j) < floor,
        None => true,
    };
    let mut end = (state.x, state.y, state.heading);
    for t in arc_times(v, p.horizon, cm.resolution()) {
        let pose = unicycle_pose(state.x, state.y, state.heading, v, omega, t);
        if unsafe_at(pose) {
            return None;
        }
        end = pose;
    }
    let mut clearance = p.clearance_cap;
    if v.abs() > 1e-12 {
        // Follow the same curve at unit speed until the cap.
        let (speed, turn) = (v.signum(), omega / v.abs());
        for s in arc_times(1.0, p.clearance_cap, cm.resolution()) {
            if unsafe_at(unicycle_pose(state.x, state.y, state.heading, speed, turn, s)) {
                clearance = s;
                break;
            }
        }
    }
    Some(ArcEval { end, clearance })
}

/// Point `lookahead` meters along the path past the waypoint nearest the robot.
pub fn lookahead_point(path: &GlobalPath, x: f64, y: f64, lookahead: f64) -> (f64, f64) {
    let wp = &path.waypoints;
    let nearest = (0..wp.len())
        .min_by(|&a, &b| {
            let da = (wp[a].0 - x).hypot(wp[a].1 - y);
            let db = (wp[b].0 - x).hypot(wp[b].1 - y);
            da.total_cmp(&db)
        })
        .unwrap_or(0);
    let mut left = lookahead;
    let mut cur = wp[nearest];
    for next in &wp[nearest + 1..] {
        let seg = (next.0 - cur.0).hypot(next.1 - cur.1);
        if seg >= left {
            let f = left / seg;
            return (cur.0 + f * (next.0 - cur.0), cur.1 + f * (next.1 - cur.1));
        }
        left -= seg;
        cur = *next;
    }
    cur
}

/// Heading term: `π − |bearing error|` from the arc's end pose to `target`.
pub fn heading_score(end: (f64, f64, f64), target: (f64, f64)) -> f64 {
    let (dx, dy) = (target.0 - end.0, target.1 - end.1);
    if dx.hypot(dy) < 1e-9 {
        return PI;
    }
    PI - wrap_angle(dy.atan2(dx) - end.2).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwaChoice {
    pub v: f64,
    pub omega: f64,
    pub score: f64,
    pub admissible: usize,
}

/// Normalizes to `[0, 1]` by the min and max over the set; a constant set maps to 0.
pub fn normalize(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// One Dynamic Window Approach step. Among the best-scoring samples (within
/// `SCORE_TIE_EPS`), prefers lower `|ω|`, then lower `v`, then lower `ω`.
pub fn dwa_step(state: &RobotState, path: &GlobalPath, cm: &Costmap, p: &DwaParams, dt: f64) -> Result<DwaChoice, NavError> {
    let goal = *path.waypoints.last().ok_or(NavError::EmptyPath)?;
    let dist_to_goal = (goal.0 - state.x).hypot(goal.1 - state.y);
    let window = dynamic_window(state, p, dt, dist_to_goal);
    let target = lookahead_point(path, state.x, state.y, p.lookahead);

    let mut cands = Vec::new();
    let (mut heading, mut clear, mut vel) = (Vec::new(), Vec::new(), Vec::new());
    for (v, omega) in sample_lattice(&window, p) {
        if let Some(arc) = evaluate_arc(state, v, omega, cm, p) {
            cands.push((v, omega));
            heading.push(heading_score(arc.end, target));
            clear.push(arc.clearance);
            vel.push(v);
        }
    }
    if cands.is_empty() {
        return Err(NavError::AllBlocked);
    }
    let (h, c, s) = (normalize(&heading), normalize(&clear), normalize(&vel));
    let scores: Vec<f64> = (0..cands.len()).map(|k| p.alpha * h[k] + p.beta * c[k] + p.gamma * s[k]).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = (0..cands.len())
        .filter(|&k| scores[k] >= best - SCORE_TIE_EPS)
        .min_by(|&a, &b| {
            let (va, oa) = cands[a];
            let (vb, ob) = cands[b];
            oa.abs().total_cmp(&ob.abs()).then(va.total_cmp(&vb)).then(oa.total_cmp(&ob))
        })
        .expect("non-empty candidate set");
    Ok(DwaChoice { v: cands[k].0, omega: cands[k].1, score: scores[k], admissible: cands.len() })
}
