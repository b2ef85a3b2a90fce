use serde::{Deserialize, Serialize};

use super::grid::OccupancyGrid;
use crate::geometry::{RigidTransform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self { v_max: 0.5, omega_max: 1.0 }
    }
}

/// Simulated base plus head. Pose is ground truth in the world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
    pub head_pan: f64,
    /// Base-from-camera transform at zero head pan.
    pub camera_mount: RigidTransform,
    pub limits: VelocityLimits,
}

pub const HEAD_PAN_LIMIT: f64 = std::f64::consts::FRAC_PI_2;

impl RobotState {
    pub fn at(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
            v: 0.0,
            omega: 0.0,
            head_pan: 0.0,
            camera_mount: RigidTransform::camera_mount(1.2, 0.2),
            limits: VelocityLimits::default(),
        }
    }

    pub fn set_head_pan(&mut self, pan: f64) {
        self.head_pan = pan.clamp(-HEAD_PAN_LIMIT, HEAD_PAN_LIMIT);
    }

    pub fn world_from_base(&self) -> RigidTransform {
        RigidTransform::from_yaw(self.heading, Vec3::new(self.x, self.y, 0.0))
    }

    pub fn base_from_camera(&self) -> RigidTransform {
        RigidTransform::from_yaw(self.head_pan, Vec3::zeros()).compose(&self.camera_mount)
    }

    pub fn world_from_camera(&self) -> RigidTransform {
        self.world_from_base().compose(&self.base_from_camera())
    }
}

/// Wraps to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut r = a.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r -= tau;
    }
    r
}

/// Closed-form unicycle pose after driving `(v, ω)` for `t` seconds.
pub fn unicycle_pose(x: f64, y: f64, heading: f64, v: f64, omega: f64, t: f64) -> (f64, f64, f64) {
    if omega.abs() < 1e-12 {
        (x + v * t * heading.cos(), y + v * t * heading.sin(), heading)
    } else {
        let h1 = heading + omega * t;
        let r = v / omega;
        (x + r * (h1.sin() - heading.sin()), y - r * (h1.cos() - heading.cos()), h1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub collided: bool,
}

/// Integrates the commanded velocities (clamped to the robot's limits) along
/// the exact unicycle arc. The arc is sampled at most a quarter cell apart;
/// if a sample lands in an occupied cell or off the map the robot stops at
/// the previous sample with zero velocity and `collided` set.
pub fn step_kinematics(state: &RobotState, cmd: (f64, f64), dt: f64, grid: &OccupancyGrid) -> StepOutcome {
    assert!(dt > 0.0, "dt must be positive");
    let v = cmd.0.clamp(-state.limits.v_max, state.limits.v_max);
    let omega = cmd.1.clamp(-state.limits.omega_max, state.limits.omega_max);
    let spacing = grid.resolution() / 4.0;
    let n = ((v.abs() * dt / spacing).ceil() as usize).max(1);

    let mut last = (state.x, state.y, state.heading);
    for k in 1..=n {
        let t = dt * k as f64 / n as f64;
        let p = unicycle_pose(state.x, state.y, state.heading, v, omega, t);
        if grid.blocks(p.0, p.1) {
            let mut s = state.clone();
            s.x = last.0;
            s.y = last.1;
            s.heading = wrap_angle(last.2);
            s.v = 0.0;
            s.omega = 0.0;
            return StepOutcome { state: s, collided: true };
        }
        last = p;
    }
    let mut s = state.clone();
    s.x = last.0;
    s.y = last.1;
    s.heading = wrap_angle(last.2);
    s.v = v;
    s.omega = omega;
    StepOutcome { state: s, collided: false }
}
