use serde::{Deserialize, Serialize};

use super::render::{pixel_ray, DepthCamera};
use super::robot::RobotState;
use super::scene::{ObjectKind, Scene, SceneObject};
use super::WorldError;
use crate::geometry::{project, BoundingBox, CameraIntrinsics, DepthImage, RigidTransform};
use crate::rng::SimRng;

/// Minimum depth for an outline point to count as in front of the camera.
const NEAR_PLANE: f64 = 0.01;

/// Parametric stand-in for a trained object detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub true_positive_rate: f64,
    pub false_positive_rate: f64,
    /// Per-coordinate box noise, pixels.
    pub box_noise_sigma: f64,
    pub max_range: f64,
    #[serde(default = "default_min_pixel_area")]
    pub min_pixel_area: u64,
}

fn default_min_pixel_area() -> u64 {
    25
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { true_positive_rate: 1.0, false_positive_rate: 0.0, box_noise_sigma: 0.0, max_range: 4.0, min_pixel_area: 25 }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<(), WorldError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.true_positive_rate) || !rate_ok(self.false_positive_rate) {
            return Err(WorldError::InvalidScene("detector rates must lie in [0, 1]".into()));
        }
        if !(self.box_noise_sigma >= 0.0 && self.box_noise_sigma.is_finite()) {
            return Err(WorldError::InvalidScene("detector box noise must be non-negative".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(WorldError::InvalidScene("detector max_range must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    /// Class the detector claims.
    pub label: ObjectKind,
    /// Index of the scene object the box was drawn from.
    pub source: usize,
    pub true_positive: bool,
}

/// Image box of the object's projected outline, clipped to the image.
/// `None` when the object is entirely behind the camera or out of frame.
pub fn projected_box(obj: &SceneObject, world_from_camera: &RigidTransform, intr: &CameraIntrinsics) -> Option<BoundingBox> {
    let cam_from_world = world_from_camera.inverse();
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for p in obj.outline_points() {
        let pc = cam_from_world.apply(&p);
        if pc.z < NEAR_PLANE {
            continue;
        }
        let Ok((u, v)) = project(&pc, intr) else { continue };
        lo = (lo.0.min(u), lo.1.min(v));
        hi = (hi.0.max(u), hi.1.max(v));
        any = true;
    }
    if !any {
        return None;
    }
    let (w, h) = (intr.width as f64, intr.height as f64);
    if hi.0 < 0.0 || hi.1 < 0.0 || lo.0 > w - 1.0 || lo.1 > h - 1.0 {
        return None;
    }
    let clip = |x: f64, max: f64| x.clamp(0.0, max) as u32;
    BoundingBox::new(clip(lo.0.floor(), w - 1.0), clip(lo.1.floor(), h - 1.0), clip(hi.0.ceil(), w - 1.0), clip(hi.1.ceil(), h - 1.0)).ok()
}

/// Pixels inside the object's box whose rendered depth is the object's own
/// surface within `max_range`.
pub fn visible_pixel_count(depth: &DepthImage, obj: &SceneObject, robot: &RobotState, camera: &DepthCamera, max_range: f64) -> u64 {
    let pose = robot.world_from_camera();
    let Some(bbox) = projected_box(obj, &pose, &camera.intrinsics) else { return 0 };
    let tol = 1e-6 + 3.0 * camera.noise_sigma;
    let mut n = 0;
    for v in bbox.v_min..=bbox.v_max {
        for u in bbox.u_min..=bbox.u_max {
            let d = depth.get(u, v);
            if d <= 0.0 {
                continue;
            }
            let (o, dir) = pixel_ray(&pose, &camera.intrinsics, u as f64, v as f64);
            if let Some(t) = obj.ray_hit(&o, &dir) {
                if t <= max_range && (d - t).abs() <= tol {
                    n += 1;
                }
            }
        }
    }
    n
}

/// One detector frame. A visible pill bottle fires with the true-positive
/// rate; otherwise a false positive may fire on a visible non-bottle object,
/// labelled as a pill bottle.
pub fn detect(
    depth: &DepthImage,
    scene: &Scene,
    robot: &RobotState,
    camera: &DepthCamera,
    model: &DetectorModel,
    rng: &mut SimRng,
) -> Option<Detection> {
    let intr = &camera.intrinsics;
    let pose = robot.world_from_camera();
    if let Some((idx, bottle)) = scene.pill_bottle() {
        let visible = visible_pixel_count(depth, bottle, robot, camera, model.max_range) >= model.min_pixel_area;
        if visible && rng.bernoulli(model.true_positive_rate) {
            let bbox = projected_box(bottle, &pose, intr)?;
            let bbox = perturb(&bbox, model.box_noise_sigma, intr, rng);
            return Some(Detection { bbox, label: ObjectKind::PillBottle, source: idx, true_positive: true });
        }
    }
    if model.false_positive_rate <= 0.0 || !rng.bernoulli(model.false_positive_rate) {
        return None;
    }
    let candidates: Vec<usize> = scene
        .objects
        .iter()
        .enumerate()
        .filter(|(_, o)| o.kind != ObjectKind::PillBottle)
        .filter(|(_, o)| visible_pixel_count(depth, o, robot, camera, model.max_range) >= model.min_pixel_area)
        .map(|(k, _)| k)
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let source = candidates[rng.index(candidates.len())];
    let bbox = projected_box(&scene.objects[source], &pose, intr)?;
    let bbox = perturb(&bbox, model.box_noise_sigma, intr, rng);
    Some(Detection { bbox, label: ObjectKind::PillBottle, source, true_positive: false })
}

fn perturb(bbox: &BoundingBox, sigma: f64, intr: &CameraIntrinsics, rng: &mut SimRng) -> BoundingBox {
    if sigma <= 0.0 {
        return *bbox;
    }
    let mut jitter = |x: u32, max: u32| (x as f64 + rng.normal(0.0, sigma)).round().clamp(0.0, max as f64) as u32;
    let (w, h) = (intr.width - 1, intr.height - 1);
    let (a, b) = (jitter(bbox.u_min, w), jitter(bbox.u_max, w));
    let (c, d) = (jitter(bbox.v_min, h), jitter(bbox.v_max, h));
    BoundingBox { u_min: a.min(b), v_min: c.min(d), u_max: a.max(b), v_max: c.max(d) }
}
