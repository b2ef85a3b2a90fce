use serde::{Deserialize, Serialize};

use super::grid::{Cell, OccupancyGrid};
use super::WorldError;
use crate::geometry::Vec3;

/// Height given to occupied grid cells when casting camera rays.
pub const DEFAULT_WALL_HEIGHT: f64 = 2.0;

const RAY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    PillBottle,
    WaterBottle,
    Distractor,
}

/// Object geometry, centered on the object's position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned box with full edge lengths `[x, y, z]`.
    Box { size: [f64; 3] },
    /// Vertical cylinder.
    Cylinder { radius: f64, height: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub kind: ObjectKind,
    pub position: Vec3,
    pub shape: Shape,
}

impl SceneObject {
    pub fn validate(&self) -> Result<(), WorldError> {
        let ok = match self.shape {
            Shape::Box { size } => size.iter().all(|s| *s > 0.0 && s.is_finite()),
            Shape::Cylinder { radius, height } => radius > 0.0 && height > 0.0 && radius.is_finite() && height.is_finite(),
        };
        if ok && self.position.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(WorldError::InvalidScene(format!("{:?} has non-positive or non-finite dimensions", self.kind)))
        }
    }

    /// Smallest positive ray parameter at which `origin + t·dir` meets the shape.
    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        match self.shape {
            Shape::Box { size } => {
                let half = Vec3::new(size[0], size[1], size[2]) / 2.0;
                ray_aabb(origin, dir, &(self.position - half), &(self.position + half))
            }
            Shape::Cylinder { radius, height } => ray_cylinder(origin, dir, &self.position, radius, height),
        }
    }

    /// Points on the silhouette-bounding surface, used to project the object's image box.
    pub fn outline_points(&self) -> Vec<Vec3> {
        match self.shape {
            Shape::Box { size } => {
                let h = Vec3::new(size[0], size[1], size[2]) / 2.0;
                let mut pts = Vec::with_capacity(8);
                for sx in [-1.0, 1.0] {
                    for sy in [-1.0, 1.0] {
                        for sz in [-1.0, 1.0] {
                            pts.push(self.position + Vec3::new(sx * h.x, sy * h.y, sz * h.z));
                        }
                    }
                }
                pts
            }
            Shape::Cylinder { radius, height } => {
                let n = 32;
                let mut pts = Vec::with_capacity(2 * n);
                for k in 0..n {
                    let a = std::f64::consts::TAU * k as f64 / n as f64;
                    // Circumscribed polygon so the outline covers the circle.
                    let r = radius / (std::f64::consts::PI / n as f64).cos();
                    for sz in [-0.5, 0.5] {
                        pts.push(self.position + Vec3::new(r * a.cos(), r * a.sin(), sz * height));
                    }
                }
                pts
            }
        }
    }
}

pub fn ray_aabb(origin: &Vec3, dir: &Vec3, lo: &Vec3, hi: &Vec3) -> Option<f64> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if dir[k] == 0.0 {
            if origin[k] < lo[k] || origin[k] > hi[k] {
                return None;
            }
            continue;
        }
        let a = (lo[k] - origin[k]) / dir[k];
        let b = (hi[k] - origin[k]) / dir[k];
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 > t1 {
            return None;
        }
    }
    if t0 > RAY_EPS {
        Some(t0)
    } else if t1 > RAY_EPS {
        Some(t1)
    } else {
        None
    }
}

fn ray_cylinder(origin: &Vec3, dir: &Vec3, center: &Vec3, radius: f64, height: f64) -> Option<f64> {
    let z0 = center.z - height / 2.0;
    let z1 = center.z + height / 2.0;
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t > RAY_EPS && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };

    let ox = origin.x - center.x;
    let oy = origin.y - center.y;
    let a = dir.x * dir.x + dir.y * dir.y;
    if a > 0.0 {
        let b = 2.0 * (ox * dir.x + oy * dir.y);
        let c = ox * ox + oy * oy - radius * radius;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                let z = origin.z + t * dir.z;
                if z >= z0 && z <= z1 {
                    consider(t);
                }
            }
        }
    }
    if dir.z != 0.0 {
        for zc in [z0, z1] {
            let t = (zc - origin.z) / dir.z;
            let x = ox + t * dir.x;
            let y = oy + t * dir.y;
            if x * x + y * y <= radius * radius {
                consider(t);
            }
        }
    }
    best
}

/// What a camera ray struck.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayTarget {
    Object(usize),
    Wall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Approach heading, radians.
    pub heading: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub grid: OccupancyGrid,
    pub rois: Vec<RegionOfInterest>,
    pub objects: Vec<SceneObject>,
    pub wall_height: f64,
}

impl Scene {
    pub fn new(grid: OccupancyGrid, rois: Vec<RegionOfInterest>, objects: Vec<SceneObject>) -> Self {
        Self { grid, rois, objects, wall_height: DEFAULT_WALL_HEIGHT }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        for o in &self.objects {
            o.validate()?;
        }
        let bottles = self.objects.iter().filter(|o| o.kind == ObjectKind::PillBottle).count();
        if bottles != 1 {
            return Err(WorldError::InvalidScene(format!("scene must hold exactly one pill bottle, found {bottles}")));
        }
        Ok(())
    }

    pub fn pill_bottle(&self) -> Option<(usize, &SceneObject)> {
        self.objects.iter().enumerate().find(|(_, o)| o.kind == ObjectKind::PillBottle)
    }

    /// Nearest hit along `origin + t·dir` with `t <= t_max`.
    pub fn cast_ray(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<(f64, RayTarget)> {
        let mut best: Option<(f64, RayTarget)> = None;
        for (k, obj) in self.objects.iter().enumerate() {
            if let Some(t) = obj.ray_hit(origin, dir) {
                if t <= t_max && best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, RayTarget::Object(k)));
                }
            }
        }
        let wall_limit = best.map_or(t_max, |(b, _)| b);
        if let Some(t) = self.wall_hit(origin, dir, wall_limit) {
            if best.is_none_or(|(b, _)| t < b) {
                best = Some((t, RayTarget::Wall));
            }
        }
        best
    }

    /// First occupied cell (extruded to `wall_height`) hit by the ray, found
    /// by walking the cells the ray's ground projection crosses.
    pub fn wall_hit(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<f64> {
        let g = &self.grid;
        let res = g.resolution();
        let (ox, oy) = g.origin();
        let gx1 = ox + g.width() as f64 * res;
        let gy1 = oy + g.height() as f64 * res;

        // Clip the ray to the map's footprint.
        let lo = Vec3::new(ox, oy, f64::NEG_INFINITY);
        let hi = Vec3::new(gx1, gy1, f64::INFINITY);
        let (mut t_enter, t_exit) = slab_interval(origin, dir, &lo, &hi)?;
        t_enter = t_enter.max(0.0);
        let t_end = t_exit.min(t_max);
        if t_enter > t_end {
            return None;
        }

        let px = origin.x + t_enter * dir.x;
        let py = origin.y + t_enter * dir.y;
        let mut i = (((px - ox) / res).floor() as i64).clamp(0, g.width() as i64 - 1);
        let mut j = (((py - oy) / res).floor() as i64).clamp(0, g.height() as i64 - 1);

        let step_i: i64 = if dir.x > 0.0 { 1 } else { -1 };
        let step_j: i64 = if dir.y > 0.0 { 1 } else { -1 };
        let next_boundary = |cell: i64, step: i64, o: f64| o + (cell + if step > 0 { 1 } else { 0 }) as f64 * res;
        let mut t_next_x = if dir.x != 0.0 { (next_boundary(i, step_i, ox) - origin.x) / dir.x } else { f64::INFINITY };
        let mut t_next_y = if dir.y != 0.0 { (next_boundary(j, step_j, oy) - origin.y) / dir.y } else { f64::INFINITY };
        let dt_x = if dir.x != 0.0 { res / dir.x.abs() } else { f64::INFINITY };
        let dt_y = if dir.y != 0.0 { res / dir.y.abs() } else { f64::INFINITY };

        loop {
            let (iu, ju) = (i as usize, j as usize);
            if g.get(iu, ju) == Cell::Occupied {
                let (x0, y0, x1, y1) = g.cell_bounds(iu, ju);
                if let Some(t) = ray_aabb(origin, dir, &Vec3::new(x0, y0, 0.0), &Vec3::new(x1, y1, self.wall_height)) {
                    if t <= t_max {
                        return Some(t);
                    }
                }
            }
            let t_cell_exit = t_next_x.min(t_next_y);
            if t_cell_exit > t_end {
                return None;
            }
            if t_next_x < t_next_y {
                i += step_i;
                t_next_x += dt_x;
            } else {
                j += step_j;
                t_next_y += dt_y;
            }
            if i < 0 || j < 0 || i >= g.width() as i64 || j >= g.height() as i64 {
                return None;
            }
        }
    }
}

fn slab_interval(origin: &Vec3, dir: &Vec3, lo: &Vec3, hi: &Vec3) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if dir[k] == 0.0 {
            if origin[k] < lo[k] || origin[k] > hi[k] {
                return None;
            }
            continue;
        }
        let a = (lo[k] - origin[k]) / dir[k];
        let b = (hi[k] - origin[k]) / dir[k];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if t0 > t1 || t1 < 0.0 {
        None
    } else {
        Some((t0, t1))
    }
}
