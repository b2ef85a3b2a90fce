use serde::{Deserialize, Serialize};

use crate::worldsim::{Cell, OccupancyGrid};

pub const LETHAL: u8 = 255;
/// Highest cost an inflated (non-lethal) cell can carry.
pub const INSCRIBED: u8 = 253;

/// Inflation layer parameters, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationParams {
    pub radius: f64,
    /// Exponential decay rate `k`, per meter.
    pub decay: f64,
    pub robot_radius: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self { radius: 0.55, decay: 3.0, robot_radius: 0.25 }
    }
}

/// Layered cost grid. Static and obstacle layers coincide here (the map is
/// the only obstacle source), so `cost` is their union plus inflation.
#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    cost: Vec<u8>,
    /// Distance from each cell center to the nearest lethal cell center,
    /// exact up to `dist_cap`; `INFINITY` beyond it.
    dist: Vec<f64>,
    dist_cap: f64,
    pub inflation: InflationParams,
}

/// Distance to which the clearance field is tracked even when the inflation
/// radius is smaller.
pub const CLEARANCE_RANGE: f64 = 1.0;

/// Inflated cost at distance `d` from the nearest lethal cell.
pub fn inflated_cost(d: f64, p: &InflationParams) -> u8 {
    if d > p.radius {
        return 0;
    }
    let c = 254.0 * (-p.decay * (d - p.robot_radius)).exp();
    c.round().clamp(1.0, INSCRIBED as f64) as u8
}

/// Builds the costmap. Occupied and Unknown cells are lethal; free cells
/// within `radius` of a lethal cell get an exponentially decaying cost.
pub fn build_costmap(grid: &OccupancyGrid, params: InflationParams) -> Costmap {
    assert!(params.radius >= 0.0, "inflation radius must be non-negative");
    let (w, h, res) = (grid.width(), grid.height(), grid.resolution());
    let dist_cap = params.radius.max(CLEARANCE_RANGE);
    let reach = (dist_cap / res).floor() as i64;
    let mut dist = vec![f64::INFINITY; w * h];
    let lethal = |c: Cell| c != Cell::Free;
    for j in 0..h {
        for i in 0..w {
            if !lethal(grid.get(i, j)) {
                continue;
            }
            // Interior cells stamp nothing a neighbouring lethal cell would not.
            let interior = i > 0
                && j > 0
                && i + 1 < w
                && j + 1 < h
                && lethal(grid.get(i - 1, j))
                && lethal(grid.get(i + 1, j))
                && lethal(grid.get(i, j - 1))
                && lethal(grid.get(i, j + 1));
            dist[j * w + i] = 0.0;
            if interior {
                continue;
            }
            for dj in -reach..=reach {
                let jj = j as i64 + dj;
                if jj < 0 || jj >= h as i64 {
                    continue;
                }
                for di in -reach..=reach {
                    let ii = i as i64 + di;
                    if ii < 0 || ii >= w as i64 {
                        continue;
                    }
                    let d = res * ((di * di + dj * dj) as f64).sqrt();
                    if d <= dist_cap {
                        let k = jj as usize * w + ii as usize;
                        if d < dist[k] {
                            dist[k] = d;
                        }
                    }
                }
            }
        }
    }
    let cost = (0..w * h)
        .map(|k| if dist[k] == 0.0 { LETHAL } else { inflated_cost(dist[k], &params) })
        .collect();
    Costmap { width: w, height: h, resolution: res, origin: grid.origin(), cost, dist, dist_cap, inflation: params }
}

impl Costmap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cost(&self, i: usize, j: usize) -> u8 {
        self.cost[j * self.width + i]
    }

    pub fn costs(&self) -> &[u8] {
        &self.cost
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[j * self.width + i]
    }

    pub fn distance_cap(&self) -> f64 {
        self.dist_cap
    }

    /// A cell the global planner may not enter.
    pub fn blocked(&self, i: usize, j: usize) -> bool {
        self.cost(i, j) >= INSCRIBED
    }

    /// Whether a world point is blocked; off-map counts as blocked.
    pub fn blocked_at(&self, x: f64, y: f64) -> bool {
        self.world_to_cell(x, y).is_none_or(|(i, j)| self.blocked(i, j))
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.origin.0) / self.resolution).floor();
        let fj = ((y - self.origin.1) / self.resolution).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.width as f64 || fj >= self.height as f64 {
            None
        } else {
            Some((fi as usize, fj as usize))
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + (i as f64 + 0.5) * self.resolution, self.origin.1 + (j as f64 + 0.5) * self.resolution)
    }

    /// Clearance at a world point: distance from its cell to the nearest
    /// lethal cell, 0 off the map.
    pub fn clearance_at(&self, x: f64, y: f64) -> f64 {
        match self.world_to_cell(x, y) {
            Some((i, j)) => self.distance(i, j),
            None => 0.0,
        }
    }
}
