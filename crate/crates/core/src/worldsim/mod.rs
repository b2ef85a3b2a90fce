//! Simulated environment: occupancy grid, scene objects, robot base and head
//! kinematics, synthetic depth rendering and a parametric detector.

mod detector;
mod grid;
mod render;
mod robot;
mod scene;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detector::{detect, projected_box, visible_pixel_count, Detection, DetectorModel};
pub use grid::{Cell, OccupancyGrid};
pub use render::{pixel_ray, render_depth, render_depth_window, DepthCamera};
pub use robot::{step_kinematics, unicycle_pose, wrap_angle, RobotState, StepOutcome, VelocityLimits, HEAD_PAN_LIMIT};
pub use scene::{ray_aabb, ObjectKind, RayTarget, RegionOfInterest, Scene, SceneObject, Shape, DEFAULT_WALL_HEIGHT};

use crate::geometry::{BoundingBox, DepthImage, RigidTransform};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("map line {line}: {message}")]
    MapParse { line: usize, message: String },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Which pixels a scan frame renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    /// Every pixel.
    Full,
    /// Only the padded union of the objects' projected boxes. Detection and
    /// localization read nothing else, so results match `Full` there.
    #[default]
    ObjectsOnly,
}

/// Padding around object boxes in `ObjectsOnly` mode, pixels.
const WINDOW_PAD: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanSchedule {
    /// Head pan angles in visiting order, radians.
    pub angles: Vec<f64>,
}

impl Default for PanSchedule {
    fn default() -> Self {
        Self { angles: [-30.0f64, -15.0, 0.0, 15.0, 30.0].iter().map(|d| d.to_radians()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanHit {
    pub pan: f64,
    pub detection: Detection,
    /// Frame the detection was made on.
    pub depth: DepthImage,
    pub base_from_camera: RigidTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub hit: Option<ScanHit>,
    /// Pan angles actually visited, in order.
    pub visited: Vec<f64>,
}

/// Renders one frame at the robot's current head pan.
pub fn render_frame(scene: &Scene, robot: &RobotState, camera: &DepthCamera, mode: RenderMode, noise: Option<&mut SimRng>) -> DepthImage {
    match mode {
        RenderMode::Full => render_depth(scene, robot, camera, noise),
        RenderMode::ObjectsOnly => {
            let intr = &camera.intrinsics;
            let pose = robot.world_from_camera();
            let window = scene
                .objects
                .iter()
                .filter_map(|o| projected_box(o, &pose, intr))
                .reduce(|a, b| a.union(&b));
            match window {
                Some(w) => {
                    let padded = BoundingBox {
                        u_min: w.u_min.saturating_sub(WINDOW_PAD),
                        v_min: w.v_min.saturating_sub(WINDOW_PAD),
                        u_max: (w.u_max + WINDOW_PAD).min(intr.width - 1),
                        v_max: (w.v_max + WINDOW_PAD).min(intr.height - 1),
                    };
                    render_depth_window(scene, robot, camera, &padded, noise)
                }
                None => DepthImage::zeros(intr.width, intr.height),
            }
        }
    }
}

/// Pans the head through the schedule, one frame per angle, and stops at the
/// first detection. The head pan is restored before returning.
pub fn scan_at_roi(
    scene: &Scene,
    robot: &mut RobotState,
    camera: &DepthCamera,
    model: &DetectorModel,
    schedule: &PanSchedule,
    mode: RenderMode,
    det_rng: &mut SimRng,
    mut noise: Option<&mut SimRng>,
) -> ScanReport {
    let saved = robot.head_pan;
    let mut visited = Vec::new();
    let mut hit = None;
    for &pan in &schedule.angles {
        robot.set_head_pan(pan);
        visited.push(robot.head_pan);
        let depth = render_frame(scene, robot, camera, mode, noise.as_deref_mut());
        if let Some(detection) = detect(&depth, scene, robot, camera, model, det_rng) {
            hit = Some(ScanHit { pan: robot.head_pan, detection, depth, base_from_camera: robot.base_from_camera() });
            break;
        }
    }
    robot.head_pan = saved;
    ScanReport { hit, visited }
}
