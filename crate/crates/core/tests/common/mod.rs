//! Checks shared by the acceptance target and the integration suites.
//! Each returns a short detail line on success and a reason on failure.

#![allow(dead_code)]

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::path::{Path, PathBuf};

use assist_sim::cli::{batch, simulate, Scenario};
use assist_sim::geometry::{backproject, fit_plane, pointing_angles, project, CameraIntrinsics, Frame, PointCloud, Vec3};
use assist_sim::metrics::{cronbach_alpha, raw_tlx, usability_composite, TlxResponse, UsabilityResponse};
use assist_sim::navigation::{
    build_costmap, dwa_step, plan_cells, Costmap, DwaParams, GlobalPath, InflationParams, INSCRIBED, LETHAL,
};
use assist_sim::orchestrator::{
    step, Action, AssistEvent, AssistLevel, AssistMode, GuidanceStep, IntentKind, OrchestratorConfig, OrchestratorState,
    Phase, TimedEvent, UserActionKind,
};
use assist_sim::rng::SimRng;
use assist_sim::usersim::{detect_confusion, gaze_stream, Aoi, GazeConfig, GazeSample, Preset, Timeline, GAZE_DT};
use assist_sim::worldsim::{Cell, OccupancyGrid, RobotState};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn lab_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/lab.json")
}

fn rng(seed: u64, id: u64) -> SimRng {
    SimRng::with_stream_id(seed, 1000 + id)
}

// ---------------------------------------------------------------- metrics

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn metric_fidelity() -> Check {
    let a = raw_tlx(&TlxResponse { items: [2.0; 6] }).map_err(|e| e.to_string())?;
    let b = raw_tlx(&TlxResponse { items: [2.5; 6] }).map_err(|e| e.to_string())?;
    let mean = (a + b) / 2.0;
    ensure!(round2(a) == 11.11, "item mean 2.0 gave {a}");
    ensure!(round2(b) == 16.67, "item mean 2.5 gave {b}");
    ensure!(round2(mean) == 13.89, "condition mean gave {mean}");
    // Q2 and Q4 are reverse coded, so raw 1s count as 5s: reversed sum 41.
    let r = UsabilityResponse { items: [5.0, 1.0, 5.0, 1.0, 5.0, 4.0, 4.0, 4.0, 4.0] };
    let u = usability_composite(&r).map_err(|e| e.to_string())?;
    ensure!(round2(u) == 88.89, "reversed mean 41/9 gave {u}");
    ensure!((u - (41.0 / 9.0 - 1.0) / 4.0 * 100.0).abs() < 1e-12, "usability mapping off: {u}");
    Ok(format!("TLX {a:.2}/{b:.2}/{mean:.2}, usability {u:.2}"))
}

pub fn cronbach() -> Check {
    // Item variances 2/3 each, total variance 14/3: alpha = 3/2 (1 - 2 / (14/3)) = 6/7.
    let fixture = vec![vec![2.0, 3.0, 3.0], vec![4.0, 4.0, 5.0], vec![3.0, 5.0, 4.0]];
    let a = cronbach_alpha(&fixture).map_err(|e| e.to_string())?;
    ensure!((a - 6.0 / 7.0).abs() <= 1e-9, "3x3 fixture gave {a}, expected 6/7");
    let dup = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![4.0, 4.0, 4.0], vec![3.0, 3.0, 3.0]];
    let d = cronbach_alpha(&dup).map_err(|e| e.to_string())?;
    ensure!((d - 1.0).abs() <= 1e-12, "duplicated items gave {d}");
    Ok(format!("fixture {a:.12}, duplicated {d}"))
}

// --------------------------------------------------------------- geometry

pub fn geometry_suite() -> Check {
    let mut r = rng(1, 1);
    let mut worst_bp = 0.0f64;
    for _ in 0..10_000 {
        let w = 640;
        let h = 480;
        let intr = CameraIntrinsics::new(
            r.uniform_range(200.0, 800.0),
            r.uniform_range(200.0, 800.0),
            r.uniform_range(280.0, 360.0),
            r.uniform_range(200.0, 280.0),
            w,
            h,
        )
        .map_err(|e| e.to_string())?;
        let (u, v, z) = (r.uniform_range(0.0, w as f64 - 1.0), r.uniform_range(0.0, h as f64 - 1.0), r.uniform_range(0.2, 10.0));
        let p = backproject(u, v, z, &intr).map_err(|e| e.to_string())?;
        let (u2, v2) = project(&p, &intr).map_err(|e| e.to_string())?;
        let err = ((u2 - u).hypot(v2 - v) / u.hypot(v).max(1.0)).max((p.z - z).abs() / z);
        worst_bp = worst_bp.max(err);
    }
    ensure!(worst_bp <= 1e-9, "back-projection round trip error {worst_bp:e}");

    let mut worst_clean = 0.0f64;
    let mut worst_noisy = 0.0f64;
    for _ in 0..200 {
        let n = loop {
            let c = Vec3::new(r.standard_normal(), r.standard_normal(), r.standard_normal());
            if c.norm() > 1e-3 {
                let c = c.normalize();
                // Keep the plane visible: not edge-on to the camera axis.
                if c.z.abs() > 0.3 {
                    break c;
                }
            }
        };
        let center = Vec3::new(r.uniform_range(-0.5, 0.5), r.uniform_range(-0.5, 0.5), r.uniform_range(0.8, 3.0));
        let a = n.cross(&Vec3::new(1.0, 0.0, 0.0)).try_normalize(1e-6).unwrap_or_else(|| n.cross(&Vec3::new(0.0, 1.0, 0.0)).normalize());
        let b = n.cross(&a);
        let mut clean = Vec::new();
        let mut noisy = Vec::new();
        for _ in 0..400 {
            let p = center + a * r.uniform_range(-0.15, 0.15) + b * r.uniform_range(-0.15, 0.15);
            clean.push(p);
            noisy.push(p + Vec3::new(r.normal(0.0, 0.005), r.normal(0.0, 0.005), r.normal(0.0, 0.005)));
        }
        let axis = Vec3::new(0.0, 0.0, 1.0);
        let angle = |pts: Vec<Vec3>| -> Result<f64, String> {
            let f = fit_plane(&PointCloud::new(Frame::Camera, pts).map_err(|e| e.to_string())?, &axis).map_err(|e| e.to_string())?;
            Ok(f.normal.dot(&n).abs().min(1.0).acos())
        };
        worst_clean = worst_clean.max(angle(clean)?);
        worst_noisy = worst_noisy.max(angle(noisy)?);
    }
    ensure!(worst_clean <= 1e-6, "noiseless plane normal off by {worst_clean:e} rad");
    ensure!(worst_noisy.to_degrees() <= 2.0, "noisy plane normal off by {:.3} deg", worst_noisy.to_degrees());

    let mut worst_point = 0.0f64;
    for _ in 0..10_000 {
        let o = Vec3::new(r.uniform_range(-1.0, 1.0), r.uniform_range(-1.0, 1.0), r.uniform_range(0.0, 1.5));
        let t = Vec3::new(r.uniform_range(-3.0, 3.0), r.uniform_range(-3.0, 3.0), r.uniform_range(0.0, 2.0));
        if (t - o).norm() < 1e-3 {
            continue;
        }
        let cmd = pointing_angles(&t, &o).map_err(|e| e.to_string())?;
        worst_point = worst_point.max((cmd.unit_direction() - (t - o).normalize()).norm());
    }
    ensure!(worst_point <= 1e-9, "pointing reconstruction error {worst_point:e}");
    Ok(format!(
        "backproject {worst_bp:.1e}, plane {worst_clean:.1e} rad / {:.3} deg, pointing {worst_point:.1e}",
        worst_noisy.to_degrees()
    ))
}

// --------------------------------------------------------------- planning

pub fn random_grid(r: &mut SimRng, n: usize, res: f64, density: f64) -> OccupancyGrid {
    let cells = (0..n * n).map(|_| if r.bernoulli(density) { Cell::Occupied } else { Cell::Free }).collect();
    OccupancyGrid::new(n, n, res, (0.0, 0.0), cells).expect("valid grid")
}

fn oracle_weight(step: f64, cost: u8) -> u64 {
    (step * (1.0 + cost as f64 / 128.0) * 4_294_967_296.0).ceil() as u64
}

fn oracle_blocked(cm: &Costmap, i: usize, j: usize) -> bool {
    cm.cost(i, j) >= INSCRIBED
}

/// Plain Dijkstra over the 8-connected grid without corner cutting.
pub fn dijkstra_units(cm: &Costmap, s: (usize, usize), g: (usize, usize)) -> Option<u64> {
    let (w, h) = (cm.width(), cm.height());
    if oracle_blocked(cm, s.0, s.1) || oracle_blocked(cm, g.0, g.1) {
        return None;
    }
    let mut dist = vec![u64::MAX; w * h];
    let mut heap = BinaryHeap::new();
    dist[s.1 * w + s.0] = 0;
    heap.push(Reverse((0u64, s.0, s.1)));
    while let Some(Reverse((d, i, j))) = heap.pop() {
        if d > dist[j * w + i] {
            continue;
        }
        if (i, j) == g {
            return Some(d);
        }
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= w as i64 || nj >= h as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                if oracle_blocked(cm, ni, nj) {
                    continue;
                }
                let diag = di != 0 && dj != 0;
                if diag && (oracle_blocked(cm, ni, j) || oracle_blocked(cm, i, nj)) {
                    continue;
                }
                let step = if diag { cm.resolution() * 2f64.sqrt() } else { cm.resolution() };
                let nd = d + oracle_weight(step, cm.cost(ni, nj));
                if nd < dist[nj * w + ni] {
                    dist[nj * w + ni] = nd;
                    heap.push(Reverse((nd, ni, nj)));
                }
            }
        }
    }
    None
}

fn path_units(cm: &Costmap, p: &GlobalPath) -> Result<u64, String> {
    let mut total = 0;
    for w in p.cells.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (di, dj) = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        ensure!(di.abs() <= 1 && dj.abs() <= 1 && (di, dj) != (0, 0), "path jumps from {a:?} to {b:?}");
        ensure!(!oracle_blocked(cm, b.0, b.1), "path enters blocked cell {b:?}");
        let step = if di != 0 && dj != 0 { cm.resolution() * 2f64.sqrt() } else { cm.resolution() };
        total += oracle_weight(step, cm.cost(b.0, b.1));
    }
    Ok(total)
}

fn free_cell(r: &mut SimRng, cm: &Costmap) -> Option<(usize, usize)> {
    for _ in 0..200 {
        let c = (r.index(cm.width()), r.index(cm.height()));
        if !oracle_blocked(cm, c.0, c.1) {
            return Some(c);
        }
    }
    None
}

pub fn astar_vs_dijkstra(n_grids: usize) -> Check {
    let mut r = rng(2, 2);
    let (mut compared, mut no_path) = (0, 0);
    for k in 0..n_grids {
        let grid = random_grid(&mut r, 20, 0.1, 0.2);
        let cm = build_costmap(&grid, InflationParams { radius: 0.3, decay: 3.0, robot_radius: 0.0 });
        let (Some(s), Some(g)) = (free_cell(&mut r, &cm), free_cell(&mut r, &cm)) else {
            return Err(format!("grid {k}: no free cell"));
        };
        let oracle = dijkstra_units(&cm, s, g);
        match (plan_cells(&cm, s, g), oracle) {
            (Ok(p), Some(units)) => {
                ensure!(p.cost_units == units, "grid {k}: A* {} vs Dijkstra {units}", p.cost_units);
                ensure!(path_units(&cm, &p)? == units, "grid {k}: path weights do not sum to its cost");
                ensure!(p.cells.first() == Some(&s) && p.cells.last() == Some(&g), "grid {k}: wrong endpoints");
                compared += 1;
            }
            (Err(_), None) => no_path += 1,
            (a, o) => return Err(format!("grid {k}: A* {:?} vs Dijkstra {o:?}", a.map(|p| p.cost_units))),
        }
    }
    ensure!(compared >= n_grids / 2, "only {compared} grids had a path");
    Ok(format!("{compared} equal costs, {no_path} agreed no-path"))
}

pub fn inflation_monotone(n_maps: usize) -> Check {
    let mut r = rng(3, 3);
    let radii = [0.0, 0.1, 0.2, 0.35, 0.5, 0.8, 1.2];
    for k in 0..n_maps {
        let density = r.uniform_range(0.02, 0.3);
        let grid = random_grid(&mut r, 20, 0.1, density);
        let decay = r.uniform_range(0.5, 6.0);
        let robot_radius = r.uniform_range(0.0, 0.3);
        let maps: Vec<Costmap> =
            radii.iter().map(|&radius| build_costmap(&grid, InflationParams { radius, decay, robot_radius })).collect();
        for w in maps.windows(2) {
            for (idx, (a, b)) in w[0].costs().iter().zip(w[1].costs()).enumerate() {
                ensure!(b >= a, "map {k}: cell {idx} cost fell from {a} to {b} as the radius grew");
            }
        }
    }
    Ok(format!("{n_maps} maps x {} radii", radii.len()))
}

// Exhaustive DWA oracle, written from the scoring definition.

fn oracle_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..n).map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

fn oracle_pose(s: &RobotState, v: f64, w: f64, t: f64) -> (f64, f64, f64) {
    if w.abs() < 1e-12 {
        (s.x + v * t * s.heading.cos(), s.y + v * t * s.heading.sin(), s.heading)
    } else {
        let th = s.heading + w * t;
        (s.x + v / w * (th.sin() - s.heading.sin()), s.y - v / w * (th.cos() - s.heading.cos()), th)
    }
}

fn oracle_times(v: f64, horizon: f64, res: f64) -> Vec<f64> {
    let n = ((v.abs() * horizon / (0.5 * res)).ceil() as usize).max(1);
    (1..=n).map(|k| horizon * k as f64 / n as f64).collect()
}

fn oracle_lookahead(path: &GlobalPath, x: f64, y: f64, dist: f64) -> (f64, f64) {
    let wp = &path.waypoints;
    let mut near = 0;
    for k in 1..wp.len() {
        if (wp[k].0 - x).hypot(wp[k].1 - y) < (wp[near].0 - x).hypot(wp[near].1 - y) {
            near = k;
        }
    }
    let mut left = dist;
    for k in near..wp.len() - 1 {
        let seg = (wp[k + 1].0 - wp[k].0).hypot(wp[k + 1].1 - wp[k].1);
        if seg >= left {
            let f = left / seg;
            return (wp[k].0 + f * (wp[k + 1].0 - wp[k].0), wp[k].1 + f * (wp[k + 1].1 - wp[k].1));
        }
        left -= seg;
    }
    wp[wp.len() - 1]
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * std::f64::consts::PI);
    if a > std::f64::consts::PI {
        a -= 2.0 * std::f64::consts::PI;
    } else if a <= -std::f64::consts::PI {
        a += 2.0 * std::f64::consts::PI;
    }
    a
}

fn unit_range(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    xs.iter().map(|x| if hi - lo < 1e-12 { 0.0 } else { (x - lo) / (hi - lo) }).collect()
}

/// Returns the `(v, ω)` the scoring definition selects, or `None` if every
/// sample collides.
pub fn dwa_oracle(s: &RobotState, path: &GlobalPath, cm: &Costmap, p: &DwaParams, dt: f64) -> Option<(f64, f64)> {
    let goal = path.waypoints[path.waypoints.len() - 1];
    let brake = (2.0 * p.acc_v * (goal.0 - s.x).hypot(goal.1 - s.y)).sqrt();
    let v_lo = (s.v - p.acc_v * dt).max(p.v_min).min(p.v_max);
    let v_hi = (s.v + p.acc_v * dt).min(p.v_max).min(brake).max(v_lo);
    let w_lo = (s.omega - p.acc_omega * dt).max(p.omega_min).min(p.omega_max);
    let w_hi = (s.omega + p.acc_omega * dt).min(p.omega_max).max(w_lo);
    let target = oracle_lookahead(path, s.x, s.y, p.lookahead);
    let res = cm.resolution();
    let floor = cm.inflation.robot_radius.min(cm.clearance_at(s.x, s.y));
    let bad = |x: f64, y: f64| match cm.world_to_cell(x, y) {
        None => true,
        Some((i, j)) => cm.cost(i, j) == LETHAL || cm.distance(i, j) < floor,
    };

    let mut cand = Vec::new();
    let (mut hs, mut cs, mut vs) = (Vec::new(), Vec::new(), Vec::new());
    for &v in &oracle_axis(v_lo, v_hi, p.n_v) {
        for &w in &oracle_axis(w_lo, w_hi, p.n_omega) {
            let poses: Vec<_> = oracle_times(v, p.horizon, res).into_iter().map(|t| oracle_pose(s, v, w, t)).collect();
            if poses.iter().any(|q| bad(q.0, q.1)) {
                continue;
            }
            let end = poses[poses.len() - 1];
            let free = if v.abs() <= 1e-12 {
                p.clearance_cap
            } else {
                let unit = RobotState { v: 0.0, omega: 0.0, ..s.clone() };
                oracle_times(1.0, p.clearance_cap, res)
                    .into_iter()
                    .find(|&d| {
                        let q = oracle_pose(&unit, v.signum(), w / v.abs(), d);
                        bad(q.0, q.1)
                    })
                    .unwrap_or(p.clearance_cap)
            };
            let (dx, dy) = (target.0 - end.0, target.1 - end.1);
            let h = if dx.hypot(dy) < 1e-9 { std::f64::consts::PI } else { std::f64::consts::PI - wrap(dy.atan2(dx) - end.2).abs() };
            cand.push((v, w));
            hs.push(h);
            cs.push(free);
            vs.push(v);
        }
    }
    if cand.is_empty() {
        return None;
    }
    let (h, c, v) = (unit_range(&hs), unit_range(&cs), unit_range(&vs));
    let score: Vec<f64> = (0..cand.len()).map(|k| p.alpha * h[k] + p.beta * c[k] + p.gamma * v[k]).collect();
    let best = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..cand.len())
        .filter(|&k| score[k] >= best - 1e-9)
        .map(|k| cand[k])
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(a.0.total_cmp(&b.0)).then(a.1.total_cmp(&b.1)))
}

pub fn dwa_vs_oracle(n_states: usize) -> Check {
    let mut r = rng(4, 4);
    let p = DwaParams::default();
    let mut done = 0;
    let mut attempts = 0;
    while done < n_states {
        attempts += 1;
        ensure!(attempts < 50 * n_states, "could not build {n_states} usable states");
        let grid = random_grid(&mut r, 20, 0.1, 0.04);
        let cm = build_costmap(&grid, InflationParams { radius: 0.3, decay: 3.0, robot_radius: 0.12 });
        let (Some(s), Some(g)) = (free_cell(&mut r, &cm), free_cell(&mut r, &cm)) else { continue };
        if s == g {
            continue;
        }
        let Ok(path) = plan_cells(&cm, s, g) else { continue };
        let (x, y) = cm.cell_center(s.0, s.1);
        let mut st = RobotState::at(x + r.uniform_range(-0.04, 0.04), y + r.uniform_range(-0.04, 0.04), r.uniform_range(-3.1, 3.1));
        st.v = r.uniform_range(p.v_min, p.v_max);
        st.omega = r.uniform_range(p.omega_min, p.omega_max);
        let oracle = dwa_oracle(&st, &path, &cm, &p, 0.1);
        match (dwa_step(&st, &path, &cm, &p, 0.1), oracle) {
            (Ok(c), Some((v, w))) => {
                ensure!(
                    (c.v - v).abs() < 1e-12 && (c.omega - w).abs() < 1e-12,
                    "state {done}: planner chose ({}, {}), oracle ({v}, {w})",
                    c.v,
                    c.omega
                );
            }
            (Err(_), None) => {}
            (a, o) => return Err(format!("state {done}: planner {:?} vs oracle {o:?}", a.map(|c| (c.v, c.omega)))),
        }
        done += 1;
    }
    Ok(format!("{n_states} states"))
}

pub fn planning_suite() -> Check {
    let a = astar_vs_dijkstra(100)?;
    let d = dwa_vs_oracle(50)?;
    let i = inflation_monotone(50)?;
    Ok(format!("A*: {a}; DWA: {d}; inflation: {i}"))
}

// ----------------------------------------------------------- orchestrator

const STEPS: [GuidanceStep; 5] = [
    GuidanceStep::LocateBottle,
    GuidanceStep::OpenBottle,
    GuidanceStep::TakePills,
    GuidanceStep::DrinkWater,
    GuidanceStep::ConfirmIntake,
];
const LEVELS: [AssistLevel; 3] = [AssistLevel::L1, AssistLevel::L2, AssistLevel::L3];
const INTENTS: [IntentKind; 7] = [
    IntentKind::Confirm,
    IntentKind::Deny,
    IntentKind::RepeatRequest,
    IntentKind::HelpRequest,
    IntentKind::Refusal,
    IntentKind::OffTopic,
    IntentKind::Unknown,
];

fn level_index(l: AssistLevel) -> usize {
    LEVELS.iter().position(|x| *x == l).expect("known level")
}

fn step_index(p: Phase) -> Option<usize> {
    p.step().map(|s| STEPS.iter().position(|x| *x == s).expect("known step"))
}

pub fn random_config(r: &mut SimRng) -> OrchestratorConfig {
    let n_rois = 1 + r.index(4);
    OrchestratorConfig {
        mode: if r.bernoulli(0.5) { AssistMode::Active } else { AssistMode::Passive },
        start_level: LEVELS[r.index(3)],
        failure_threshold: 1 + r.index(3) as u32,
        max_repeats: r.index(4) as u32,
        gaze_repeat: r.bernoulli(0.5),
        roi_labels: (0..n_rois).map(|k| format!("spot {k}")).collect(),
        ..OrchestratorConfig::default()
    }
}

fn random_event(r: &mut SimRng, s: &OrchestratorState, cfg: &OrchestratorConfig) -> AssistEvent {
    let n_rois = cfg.roi_labels.len();
    match r.index(14) {
        0..=3 => AssistEvent::Timeout { phase: if r.bernoulli(0.9) { s.phase } else { Phase::Reminding } },
        4 | 5 => AssistEvent::Intent { intent: INTENTS[r.index(INTENTS.len())] },
        6 => AssistEvent::RecordPressed { transcript: "hello".into() },
        7 => AssistEvent::StartNavigationPressed,
        8 => {
            let action = match s.phase.step() {
                Some(step) if r.bernoulli(0.6) => step.action(),
                _ => STEPS[r.index(5)].action(),
            };
            AssistEvent::UserAction { action }
        }
        9 => AssistEvent::Found {
            roi: r.index(n_rois),
            target: Vec3::new(r.uniform_range(-1.5, 2.0), r.uniform_range(-1.5, 1.5), r.uniform_range(0.4, 1.0)),
            true_positive: r.bernoulli(0.9),
        },
        10 => AssistEvent::Miss { roi: r.index(n_rois) },
        11 => AssistEvent::RoiUnreachable { roi: r.index(n_rois) },
        12 => {
            if r.bernoulli(0.3) {
                AssistEvent::Exhausted
            } else {
                AssistEvent::GazeConfusion
            }
        }
        _ => AssistEvent::ScheduleDue,
    }
}

/// Checks one transition against the invariants; `last_step` tracks the
/// furthest guidance step reached.
fn check_transition(
    before: &OrchestratorState,
    after: &OrchestratorState,
    actions: &[Action],
    cfg: &OrchestratorConfig,
    last_step: &mut Option<usize>,
) -> Result<(), String> {
    let (l0, l1) = (level_index(before.level), level_index(after.level));
    ensure!(l1 >= l0, "level fell from {:?} to {:?}", before.level, after.level);
    ensure!(l1 <= l0 + 1, "level skipped from {:?} to {:?}", before.level, after.level);
    if before.phase.is_terminal() {
        ensure!(after.phase == before.phase && actions.is_empty(), "left terminal phase {:?}", before.phase);
    }
    if let Some(k) = step_index(after.phase) {
        let ok = match *last_step {
            None => k == 0,
            Some(j) => k == j || k == j + 1,
        };
        ensure!(ok, "step order broken: {:?} after step {:?}", after.phase, last_step.map(|j| STEPS[j]));
        *last_step = Some(k);
    }
    if cfg.mode == AssistMode::Passive {
        ensure!(
            !actions.iter().any(|a| a.is_gesture() || a.is_navigation()),
            "passive mode emitted {actions:?}"
        );
    }
    Ok(())
}

/// Upper bound on events a silent user needs to reach a terminal phase.
pub fn silent_bound(cfg: &OrchestratorConfig) -> usize {
    let depth = LEVELS.len();
    (cfg.max_repeats as usize + 1) * STEPS.len() * depth + cfg.failure_threshold as usize * depth + cfg.roi_labels.len() + 4
}

fn silent_event(s: &OrchestratorState) -> AssistEvent {
    match s.phase {
        Phase::Idle => AssistEvent::ScheduleDue,
        Phase::Navigating | Phase::Scanning => AssistEvent::Exhausted,
        p => AssistEvent::Timeout { phase: p },
    }
}

fn compliant_event(s: &OrchestratorState) -> AssistEvent {
    match s.phase {
        Phase::Idle => AssistEvent::ScheduleDue,
        p => AssistEvent::UserAction { action: p.step().map_or(UserActionKind::PicksUpBottle, |k| k.action()) },
    }
}

pub fn orchestrator_sequences(n: usize) -> Check {
    let mut terminated_silent = 0;
    let mut terminated_compliant = 0;
    let mut transitions = 0;
    for seq in 0..n {
        let mut r = rng(5, seq as u64);
        let cfg = random_config(&mut r);
        let mut s = OrchestratorState::new(&cfg);
        let mut t = 0.0;
        let mut last_step = None;
        let len = 10 + r.index(80);
        let apply = |s: &mut OrchestratorState, t: f64, ev: AssistEvent, last_step: &mut Option<usize>| -> Result<(), String> {
            let tr = step(s, &TimedEvent::new(t, ev.clone()), &cfg).map_err(|e| format!("sequence {seq}: {e}"))?;
            check_transition(s, &tr.state, &tr.actions, &cfg, last_step).map_err(|e| format!("sequence {seq}, {ev:?}: {e}"))?;
            *s = tr.state;
            Ok(())
        };
        for _ in 0..len {
            t += if r.bernoulli(0.2) { 0.0 } else { r.uniform_range(0.0, 30.0) };
            let ev = random_event(&mut r, &s, &cfg);
            apply(&mut s, t, ev, &mut last_step)?;
            transitions += 1;
        }
        // Termination: a silent user in active mode, a compliant one in passive
        // mode (passive mode has no timers; the episode cap ends silent runs).
        let bound = silent_bound(&cfg);
        for k in 0..=bound {
            if s.phase.is_terminal() {
                break;
            }
            ensure!(k < bound, "sequence {seq}: not terminal after {bound} follow-up events, stuck in {:?}", s.phase);
            t += 1.0;
            let ev = match cfg.mode {
                AssistMode::Active => silent_event(&s),
                AssistMode::Passive => compliant_event(&s),
            };
            apply(&mut s, t, ev, &mut last_step)?;
            transitions += 1;
        }
        match cfg.mode {
            AssistMode::Active => terminated_silent += 1,
            AssistMode::Passive => terminated_compliant += 1,
        }
    }
    Ok(format!("{n} sequences, {transitions} transitions, {terminated_silent} active / {terminated_compliant} passive terminated"))
}

/// Condition A episodes never gesture or navigate.
pub fn passive_logs_clean(seeds: std::ops::RangeInclusive<u64>) -> Check {
    let s = Scenario::load(&lab_path()).map_err(|e| e.to_string())?;
    let mut n = 0;
    for seed in seeds {
        let (ep, _) = simulate(&s, "A", seed).map_err(|e| e.to_string())?;
        for e in &ep.log.events {
            ensure!(
                !e.actions.iter().any(|a| a.is_gesture() || a.is_navigation()),
                "A seed {seed} event {} has {:?}",
                e.seq,
                e.actions
            );
        }
        n += 1;
    }
    Ok(format!("{n} condition A logs"))
}

pub fn orchestrator_suite() -> Check {
    let a = orchestrator_sequences(500)?;
    let b = passive_logs_clean(1..=30)?;
    Ok(format!("{a}; {b}"))
}

// ------------------------------------------------------------ directional

pub struct Directional {
    pub median_time: (f64, f64),
    pub median_rounds: (f64, f64),
    pub agree: usize,
    pub n: usize,
    pub disagreeing: Vec<u64>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn directional_run(n_seeds: u64) -> Result<Directional, String> {
    let s = Scenario::load(&lab_path()).map_err(|e| e.to_string())?;
    ensure!(
        s.config.profile.resolve() == Preset::Misplaces.profile(),
        "lab scenario does not use the misplaces profile"
    );
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (1..=n_seeds).collect();
    let out = batch(&s, &["A".into(), "B".into()], &seeds, dir.path(), None).map_err(|e| e.to_string())?;
    ensure!(out.manifest.failures.is_empty(), "failed runs: {:?}", out.manifest.failures);
    let get = |c: &str, seed: u64| out.sessions.iter().find(|m| m.condition == c && m.seed == seed).cloned();
    let mut agree = 0;
    let mut disagreeing = Vec::new();
    let (mut ta, mut tb, mut ra, mut rb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &seed in &seeds {
        let (a, b) = (get("A", seed).ok_or("missing A run")?, get("B", seed).ok_or("missing B run")?);
        if b.time_to_locate < a.time_to_locate && b.interaction_rounds > a.interaction_rounds {
            agree += 1;
        } else {
            disagreeing.push(seed);
        }
        ta.push(a.time_to_locate);
        tb.push(b.time_to_locate);
        ra.push(a.interaction_rounds as f64);
        rb.push(b.interaction_rounds as f64);
    }
    Ok(Directional {
        median_time: (median(ta), median(tb)),
        median_rounds: (median(ra), median(rb)),
        agree,
        n: seeds.len(),
        disagreeing,
    })
}

pub fn directional() -> Check {
    let d = directional_run(30)?;
    let detail = format!(
        "time A {:.1} s vs B {:.1} s, rounds A {} vs B {}, agreement {}/{} (other seeds {:?})",
        d.median_time.0, d.median_time.1, d.median_rounds.0, d.median_rounds.1, d.agree, d.n, d.disagreeing
    );
    ensure!(d.median_time.1 < d.median_time.0, "median time not lower in B: {detail}");
    ensure!(d.median_rounds.1 > d.median_rounds.0, "median rounds not higher in B: {detail}");
    ensure!(d.agree >= 28, "sign agreement too low: {detail}");
    Ok(detail)
}

// ------------------------------------------------------------ determinism

pub fn determinism() -> Check {
    use sha2::{Digest, Sha256};
    let s = Scenario::load(&lab_path()).map_err(|e| e.to_string())?;
    let mut n = 0;
    for cond in ["A", "B"] {
        for seed in [1u64, 7, 19] {
            let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
            let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
            let o1 = assist_sim::cli::run(&s, cond, seed, d1.path()).map_err(|e| e.to_string())?;
            let o2 = assist_sim::cli::run(&s, cond, seed, d2.path()).map_err(|e| e.to_string())?;
            for f in [assist_sim::cli::LOG_FILE, assist_sim::cli::GAZE_FILE, assist_sim::cli::METRICS_FILE] {
                let a = std::fs::read(d1.path().join(&o1.dir).join(f)).map_err(|e| e.to_string())?;
                let b = std::fs::read(d2.path().join(&o2.dir).join(f)).map_err(|e| e.to_string())?;
                ensure!(a == b, "{cond} seed {seed}: {f} differs between runs");
            }
            let log = std::fs::read(d1.path().join(&o1.dir).join(assist_sim::cli::LOG_FILE)).map_err(|e| e.to_string())?;
            ensure!(hex::encode(Sha256::digest(&log)) == o1.log_sha256, "{cond} seed {seed}: reported hash mismatch");
            ensure!(o1.log_sha256 == o2.log_sha256, "{cond} seed {seed}: hashes differ");
            n += 1;
        }
    }
    Ok(format!("{n} (condition, seed) pairs byte-identical"))
}

// -------------------------------------------------------------- confusion

/// Window scan: every maximal single-AOI fixation window on a task AOI that
/// is long enough and contains no action.
pub fn confusion_oracle(stream: &[GazeSample], actions: &[f64], threshold: f64) -> Vec<(usize, usize)> {
    let same = |k: usize, aoi: Aoi| stream[k].is_fixation && stream[k].aoi == aoi;
    let mut out = Vec::new();
    for i in 0..stream.len() {
        let aoi = stream[i].aoi;
        if !aoi.is_task() || !stream[i].is_fixation || (i > 0 && same(i - 1, aoi)) {
            continue;
        }
        for j in i..stream.len() {
            if !same(j, aoi) {
                break;
            }
            if j + 1 < stream.len() && same(j + 1, aoi) {
                continue;
            }
            let (start, end) = (stream[i].timestamp, stream[j].timestamp + GAZE_DT);
            let long = (j - i + 1) as f64 / 180.0 >= threshold - 1e-9;
            if long && !actions.iter().any(|&a| a >= start && a < end) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn random_stream(r: &mut SimRng, n: usize) -> Vec<GazeSample> {
    let aois = [Aoi::Bottle, Aoi::Robot, Aoi::TabletUi, Aoi::Elsewhere];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let aoi = aois[r.index(aois.len())];
        let fix = r.bernoulli(0.8);
        let len = if r.bernoulli(0.3) { 1 + r.index(6) } else { 50 + r.index(700) };
        for _ in 0..len.min(n - out.len()) {
            let k = out.len();
            out.push(GazeSample { timestamp: k as f64 / 180.0, aoi, is_fixation: fix });
        }
    }
    out
}

fn fixation_run_lengths(stream: &[GazeSample]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < stream.len() {
        let mut j = k;
        while j + 1 < stream.len() && stream[j + 1].aoi == stream[k].aoi && stream[j + 1].is_fixation == stream[k].is_fixation {
            j += 1;
        }
        if stream[k].is_fixation && stream[k].aoi.is_task() && j - k + 1 >= 90 {
            out.push(j - k + 1);
        }
        k = j + 1;
    }
    out
}

pub fn confusion_suite() -> Check {
    let mut r = rng(6, 6);
    let mut events = 0;
    for k in 0..200 {
        let n = 500 + r.index(3000);
        let stream = random_stream(&mut r, n);
        let duration = n as f64 / 180.0;
        let actions: Vec<f64> = (0..r.index(6)).map(|_| {
            // Some actions sit exactly on sample boundaries.
            if r.bernoulli(0.5) { r.index(n) as f64 / 180.0 } else { r.uniform_range(0.0, duration) }
        }).collect();
        let runs = fixation_run_lengths(&stream);
        let threshold = if !runs.is_empty() && r.bernoulli(0.5) {
            // Land on, or one sample either side of, a real run length.
            let m = runs[r.index(runs.len())] as i64 + r.index(3) as i64 - 1;
            m.max(1) as f64 / 180.0
        } else {
            r.uniform_range(0.5, 4.0)
        };
        let got = detect_confusion(&stream, &actions, threshold).map_err(|e| format!("stream {k}: {e}"))?;
        let want = confusion_oracle(&stream, &actions, threshold);
        let got_idx: Vec<(f64, f64)> = got.iter().map(|e| (e.start, e.end)).collect();
        let want_idx: Vec<(f64, f64)> = want.iter().map(|&(i, j)| (stream[i].timestamp, stream[j].timestamp + GAZE_DT)).collect();
        ensure!(got_idx == want_idx, "stream {k}: detector {got_idx:?} vs oracle {want_idx:?}");
        events += want.len();
    }
    let profile = Preset::Healthy.profile();
    let tl = Timeline { duration: 1.0, ..Timeline::default() };
    let (one_second, _) = gaze_stream(&tl, &profile, &GazeConfig::default(), &mut rng(7, 7));
    ensure!(one_second.len() == 180, "1 s stream has {} samples", one_second.len());
    Ok(format!("200 streams, {events} confusion runs agreed; 1 s = {} samples", one_second.len()))
}

pub fn criteria() -> Vec<(&'static str, f64, fn() -> Check)> {
    vec![
        ("metric formula fidelity", 1.0, metric_fidelity),
        ("geometry oracle suite", 5.0, geometry_suite),
        ("planning oracle suite", 30.0, planning_suite),
        ("orchestrator property suite", f64::INFINITY, orchestrator_suite),
        ("directional study reproduction", 120.0, directional),
        ("determinism", f64::INFINITY, determinism),
        ("confusion detection oracle", f64::INFINITY, confusion_suite),
        ("cronbach alpha", f64::INFINITY, cronbach),
    ]
}
