use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::costmap::Costmap;
use super::NavError;

/// Fixed-point scale for path costs. Integer weights make optimal costs
/// exactly comparable between planners regardless of summation order.
pub const COST_SCALE: f64 = 4_294_967_296.0;

const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPath {
    /// Cell-center world coordinates from start to goal.
    pub waypoints: Vec<(f64, f64)>,
    pub cells: Vec<(usize, usize)>,
    /// Accumulated traversal cost, `cost_units / COST_SCALE`.
    pub cost: f64,
    pub cost_units: u64,
}

impl GlobalPath {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum()
    }
}

/// Weight of a move of `step_len` meters into a cell of cost `dest_cost`,
/// `step_len·(1 + cost/128)`, in fixed-point units rounded up.
pub fn edge_weight_units(step_len: f64, dest_cost: u8) -> u64 {
    (step_len * (1.0 + dest_cost as f64 / 128.0) * COST_SCALE).ceil() as u64
}

fn heuristic_units(cm: &Costmap, a: (usize, usize), b: (usize, usize)) -> u64 {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    // Shrunk slightly so float rounding can never overestimate.
    (cm.resolution() * dx.hypot(dy) * COST_SCALE * (1.0 - 1e-12)).floor() as u64
}

/// Moves allowed from a cell: 8-connected, into unblocked cells, and
/// diagonals only when both adjacent orthogonal cells are unblocked.
pub fn successors(cm: &Costmap, (i, j): (usize, usize)) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
    let (w, h) = (cm.width() as i64, cm.height() as i64);
    let res = cm.resolution();
    NEIGHBORS.iter().filter_map(move |&(di, dj)| {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if ni < 0 || nj < 0 || ni >= w || nj >= h {
            return None;
        }
        let (ni, nj) = (ni as usize, nj as usize);
        if cm.blocked(ni, nj) {
            return None;
        }
        let diagonal = di != 0 && dj != 0;
        if diagonal && (cm.blocked(ni, j) || cm.blocked(i, nj)) {
            return None;
        }
        let step = if diagonal { res * std::f64::consts::SQRT_2 } else { res };
        Some(((ni, nj), edge_weight_units(step, cm.cost(ni, nj))))
    })
}

/// A* from the cell containing `start` to the cell containing `goal`.
pub fn plan_global(cm: &Costmap, start: (f64, f64), goal: (f64, f64)) -> Result<GlobalPath, NavError> {
    let s = cm.world_to_cell(start.0, start.1).ok_or(NavError::OffMap)?;
    let g = cm.world_to_cell(goal.0, goal.1).ok_or(NavError::OffMap)?;
    plan_cells(cm, s, g)
}

pub fn plan_cells(cm: &Costmap, s: (usize, usize), g: (usize, usize)) -> Result<GlobalPath, NavError> {
    if cm.blocked(s.0, s.1) || cm.blocked(g.0, g.1) {
        return Err(NavError::LethalEndpoint);
    }
    let w = cm.width();
    let idx = |c: (usize, usize)| c.1 * w + c.0;
    let n = w * cm.height();
    let mut best = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    best[idx(s)] = 0;
    open.push(Reverse((heuristic_units(cm, s, g), 0u64, idx(s))));
    while let Some(Reverse((_, gcost, k))) = open.pop() {
        if closed[k] {
            continue;
        }
        closed[k] = true;
        let cell = (k % w, k / w);
        if cell == g {
            return Ok(reconstruct(cm, &parent, k, gcost));
        }
        for (nb, wt) in successors(cm, cell) {
            let nk = idx(nb);
            let cand = gcost + wt;
            if !closed[nk] && cand < best[nk] {
                best[nk] = cand;
                parent[nk] = k;
                open.push(Reverse((cand + heuristic_units(cm, nb, g), cand, nk)));
            }
        }
    }
    Err(NavError::NoPath)
}

fn reconstruct(cm: &Costmap, parent: &[usize], goal: usize, units: u64) -> GlobalPath {
    let w = cm.width();
    let mut cells = vec![(goal % w, goal / w)];
    let mut k = goal;
    while parent[k] != usize::MAX {
        k = parent[k];
        cells.push((k % w, k / w));
    }
    cells.reverse();
    let waypoints = cells.iter().map(|&(i, j)| cm.cell_center(i, j)).collect();
    GlobalPath { waypoints, cells, cost: units as f64 / COST_SCALE, cost_units: units }
}
