use serde::{Deserialize, Serialize};

use super::robot::RobotState;
use super::scene::Scene;
use crate::geometry::{BoundingBox, CameraIntrinsics, DepthImage, RigidTransform, Vec3};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCamera {
    pub intrinsics: CameraIntrinsics,
    /// Returns beyond this depth are reported as 0.
    pub max_range: f64,
    /// Additive Gaussian depth noise, meters.
    #[serde(default)]
    pub noise_sigma: f64,
}

/// World-frame ray through pixel `(u, v)`. The direction is scaled so the
/// ray parameter equals depth along the optical axis.
pub fn pixel_ray(world_from_camera: &RigidTransform, intr: &CameraIntrinsics, u: f64, v: f64) -> (Vec3, Vec3) {
    let d_cam = Vec3::new((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
    (*world_from_camera.translation(), world_from_camera.apply_vector(&d_cam))
}

/// Renders the full depth image seen from the robot's head camera.
pub fn render_depth(scene: &Scene, robot: &RobotState, camera: &DepthCamera, noise: Option<&mut SimRng>) -> DepthImage {
    let intr = &camera.intrinsics;
    let full = BoundingBox { u_min: 0, v_min: 0, u_max: intr.width - 1, v_max: intr.height - 1 };
    render_depth_window(scene, robot, camera, &full, noise)
}

/// Renders only the pixels inside `window`; everything else stays 0.
pub fn render_depth_window(
    scene: &Scene,
    robot: &RobotState,
    camera: &DepthCamera,
    window: &BoundingBox,
    mut noise: Option<&mut SimRng>,
) -> DepthImage {
    let intr = &camera.intrinsics;
    let pose = robot.world_from_camera();
    let mut img = DepthImage::zeros(intr.width, intr.height);
    let u_max = window.u_max.min(intr.width - 1);
    let v_max = window.v_max.min(intr.height - 1);
    for v in window.v_min..=v_max {
        for u in window.u_min..=u_max {
            let (o, d) = pixel_ray(&pose, intr, u as f64, v as f64);
            if let Some((t, _)) = scene.cast_ray(&o, &d, camera.max_range) {
                let z = match noise.as_deref_mut() {
                    Some(rng) if camera.noise_sigma > 0.0 => t + rng.normal(0.0, camera.noise_sigma),
                    _ => t,
                };
                img.set(u, v, z);
            }
        }
    }
    img
}
