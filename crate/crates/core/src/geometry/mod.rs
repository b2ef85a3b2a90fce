//! Perception geometry: pinhole projection, rigid frame transforms, depth-band
//! foreground extraction, covariance plane fitting and deictic pointing angles.
//!
//! Frames follow the usual robotics conventions. The camera frame is optical
//! (x right, y down, z forward); the base frame is x forward, y left, z up.
//! Angles are radians throughout.

mod foreground;
mod plane;

pub use foreground::{extract_foreground, ForegroundMask};
pub use plane::{fit_plane, select_patch, PlaneFit};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Default half-width of the depth band kept around the median depth.
pub const DEFAULT_BAND_HALFWIDTH: f64 = 0.15;
/// Default plane-fit patch radius, as a multiple of the cloud's RMS radius.
pub const DEFAULT_PATCH_RADIUS_FACTOR: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("pixel ({u}, {v}) is outside the {width}x{height} image")]
    OutOfBounds { u: f64, v: f64, width: u32, height: u32 },
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("bounding box contains no valid depth")]
    EmptyBox,
    #[error("degenerate patch: {0}")]
    DegeneratePatch(&'static str),
    #[error("pointing direction has zero length")]
    ZeroDirection,
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
    #[error("invalid depth image: {0}")]
    InvalidDepth(String),
    #[error("matrix is not a proper rotation")]
    NotARotation,
    #[error("point cloud is empty")]
    EmptyCloud,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let intr = Self { fx, fy, cx, cy, width, height };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("image size must be nonzero".into()));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) || !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }
}

/// Per-pixel depth (distance along the optical axis) in meters, row-major.
/// Zero marks a pixel with no return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(GeometryError::InvalidDepth(format!(
                "expected {} values for {}x{}, got {}",
                width as usize * height as usize,
                width,
                height,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(GeometryError::InvalidDepth(format!("depth value {bad} is not a finite non-negative number")));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0.0; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    /// Negative or non-finite values are stored as 0 (invalid).
    pub fn set(&mut self, u: u32, v: u32, depth: f64) {
        let d = if depth.is_finite() && depth > 0.0 { depth } else { 0.0 };
        let w = self.width as usize;
        self.data[v as usize * w + u as usize] = d;
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub u_min: u32,
    pub v_min: u32,
    pub u_max: u32,
    pub v_max: u32,
}

impl BoundingBox {
    pub fn new(u_min: u32, v_min: u32, u_max: u32, v_max: u32) -> Result<Self> {
        if u_min > u_max || v_min > v_max {
            return Err(GeometryError::InvalidBox(format!(
                "corners out of order: ({u_min}, {v_min}) .. ({u_max}, {v_max})"
            )));
        }
        Ok(Self { u_min, v_min, u_max, v_max })
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.u_max < width && self.v_max < height
    }

    pub fn center(&self) -> (u32, u32) {
        ((self.u_min + self.u_max) / 2, (self.v_min + self.v_max) / 2)
    }

    pub fn width(&self) -> u32 {
        self.u_max - self.u_min + 1
    }

    pub fn height(&self) -> u32 {
        self.v_max - self.v_min + 1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            u_min: self.u_min.min(other.u_min),
            v_min: self.v_min.min(other.v_min),
            u_max: self.u_max.max(other.u_max),
            v_max: self.v_max.max(other.v_max),
        }
    }
}

/// Back-projects pixel `(u, v)` at depth `z` into the camera frame.
pub fn backproject(u: f64, v: f64, z: f64, intr: &CameraIntrinsics) -> Result<Vec3> {
    if !(z > 0.0) {
        return Err(GeometryError::NonPositiveDepth(z));
    }
    if !intr.contains(u, v) {
        return Err(GeometryError::OutOfBounds { u, v, width: intr.width, height: intr.height });
    }
    Ok(Vec3::new((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z))
}

/// Projects a camera-frame point to pixel coordinates. The result may lie
/// outside the image; callers clip as needed.
pub fn project(p: &Vec3, intr: &CameraIntrinsics) -> Result<(f64, f64)> {
    if !(p.z > 0.0) {
        return Err(GeometryError::BehindCamera(p.z));
    }
    Ok((intr.fx * p.x / p.z + intr.cx, intr.fy * p.y / p.z + intr.cy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

const ROTATION_TOL: f64 = 1e-9;

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let err = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(err <= ROTATION_TOL) || !((rotation.determinant() - 1.0).abs() <= ROTATION_TOL) {
            return Err(GeometryError::NotARotation);
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vec3::zeros() }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self { rotation: Matrix3::identity(), translation: t }
    }

    /// Rotation by `yaw` about +z, then translation `t`.
    pub fn from_yaw(yaw: f64, t: Vec3) -> Self {
        let (s, c) = yaw.sin_cos();
        let rotation = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        Self { rotation, translation: t }
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64, t: Vec3) -> Self {
        let axis = nalgebra::Unit::new_normalize(*axis);
        let rotation = *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix();
        Self { rotation, translation: t }
    }

    /// Base-from-camera transform for a head camera at `height` meters,
    /// looking along base +x and pitched down by `tilt` radians.
    pub fn camera_mount(height: f64, tilt: f64) -> Self {
        let (s, c) = tilt.sin_cos();
        let x_axis = Vec3::new(0.0, -1.0, 0.0);
        let y_axis = Vec3::new(-s, 0.0, -c);
        let z_axis = Vec3::new(c, 0.0, -s);
        let rotation = Matrix3::from_columns(&[x_axis, y_axis, z_axis]);
        Self { rotation, translation: Vec3::new(0.0, 0.0, height) }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -(rt * self.translation) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Camera,
    Base,
    World,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    frame: Frame,
    points: Vec<Vec3>,
    centroid: Vec3,
}

impl PointCloud {
    pub fn new(frame: Frame, points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        let centroid = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64;
        Ok(Self { frame, points, centroid })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Applies `transform` to every point and tags the result with `frame`.
pub fn transform_cloud(cloud: &PointCloud, transform: &RigidTransform, frame: Frame) -> PointCloud {
    let points: Vec<Vec3> = cloud.points.iter().map(|p| transform.apply(p)).collect();
    PointCloud::new(frame, points).expect("non-empty input cloud")
}

pub fn to_base(cloud: &PointCloud, base_from_camera: &RigidTransform) -> PointCloud {
    transform_cloud(cloud, base_from_camera, Frame::Base)
}

/// Back-projects every mask pixel into a camera-frame cloud.
pub fn mask_to_cloud(depth: &DepthImage, mask: &ForegroundMask, intr: &CameraIntrinsics) -> Result<PointCloud> {
    let points = mask
        .pixels
        .iter()
        .map(|&(u, v)| backproject(u as f64, v as f64, depth.get(u, v), intr))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(Frame::Camera, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingCommand {
    pub yaw: f64,
    pub pitch: f64,
    pub arm_origin: Vec3,
    pub direction: Vec3,
}

impl PointingCommand {
    /// Unit vector reconstructed from yaw and pitch.
    pub fn unit_direction(&self) -> Vec3 {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        Vec3::new(cp * cy, cp * sy, sp)
    }
}

/// Yaw/pitch of the ray from `arm_origin` to `target`, both in the base frame.
pub fn pointing_angles(target: &Vec3, arm_origin: &Vec3) -> Result<PointingCommand> {
    let d = target - arm_origin;
    if d.norm() < 1e-9 {
        return Err(GeometryError::ZeroDirection);
    }
    let mut yaw = d.y.atan2(d.x);
    if yaw <= -std::f64::consts::PI {
        yaw = std::f64::consts::PI;
    }
    let pitch = d.z.atan2(d.x.hypot(d.y));
    Ok(PointingCommand { yaw, pitch, arm_origin: *arm_origin, direction: d })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizationConfig {
    pub band_halfwidth: f64,
    pub patch_radius_factor: f64,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self { band_halfwidth: DEFAULT_BAND_HALFWIDTH, patch_radius_factor: DEFAULT_PATCH_RADIUS_FACTOR }
    }
}

/// A detected object's 3-D estimate in the base frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetEstimate {
    pub centroid: Vec3,
    pub plane: Option<PlaneFit>,
    pub mask_pixels: usize,
    pub median_depth: f64,
    /// False when no depth-band component touched the box center and the
    /// largest component was used instead.
    pub center_hit: bool,
}

/// Full box-to-target chain: foreground mask, back-projection, base-frame
/// transform, centroid, and a plane fit over the central patch.
pub fn localize_target(
    depth: &DepthImage,
    bbox: &BoundingBox,
    intr: &CameraIntrinsics,
    base_from_camera: &RigidTransform,
    cfg: &LocalizationConfig,
) -> Result<TargetEstimate> {
    let mask = extract_foreground(depth, bbox, cfg.band_halfwidth)?;
    let cam_cloud = mask_to_cloud(depth, &mask, intr)?;
    let base_cloud = to_base(&cam_cloud, base_from_camera);
    let patch = select_patch(&base_cloud, cfg.patch_radius_factor);
    let optical_axis = base_from_camera.apply_vector(&Vec3::z());
    let plane = fit_plane(&patch, &optical_axis).ok();
    Ok(TargetEstimate {
        centroid: base_cloud.centroid(),
        plane,
        mask_pixels: mask.pixels.len(),
        median_depth: mask.z_m,
        center_hit: mask.center_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn backproject_principal_point_is_optical_axis() {
        let p = backproject(320.0, 240.0, 2.0, &intr()).unwrap();
        assert_eq!(p, Vec3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn backproject_hand_example() {
        let p = backproject(420.0, 300.0, 2.0, &intr()).unwrap();
        assert!((p - Vec3::new(0.4, 0.24, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn backproject_errors() {
        assert_eq!(backproject(320.0, 240.0, 0.0, &intr()), Err(GeometryError::NonPositiveDepth(0.0)));
        assert!(matches!(backproject(640.0, 10.0, 1.0, &intr()), Err(GeometryError::OutOfBounds { .. })));
        assert!(matches!(backproject(-1.0, 10.0, 1.0, &intr()), Err(GeometryError::OutOfBounds { .. })));
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&Vec3::new(0.0, 0.0, 2.0), &intr()).unwrap(), (320.0, 240.0));
        let (u, v) = project(&Vec3::new(0.4, 0.24, 2.0), &intr()).unwrap();
        assert!((u - 420.0).abs() < 1e-9 && (v - 300.0).abs() < 1e-9);
        assert_eq!(project(&Vec3::new(0.0, 0.0, -1.0), &intr()), Err(GeometryError::BehindCamera(-1.0)));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 3.9, 0.0, 4, 4).is_ok());
    }

    #[test]
    fn to_base_examples() {
        let cloud = PointCloud::new(Frame::Camera, vec![Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        let same = to_base(&cloud, &RigidTransform::identity());
        assert_eq!(same.points(), cloud.points());
        assert_eq!(same.frame(), Frame::Base);

        let shifted = to_base(&cloud, &RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0)));
        assert_eq!(shifted.points()[0], Vec3::new(1.0, 0.0, 2.0));

        let one = PointCloud::new(Frame::Camera, vec![Vec3::x()]).unwrap();
        let rotated = to_base(&one, &RigidTransform::from_yaw(FRAC_PI_2, Vec3::zeros()));
        assert!((rotated.points()[0] - Vec3::y()).norm() < 1e-9);
        assert!((rotated.centroid() - Vec3::y()).norm() < 1e-9);
    }

    #[test]
    fn rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert_eq!(RigidTransform::new(m, Vec3::zeros()), Err(GeometryError::NotARotation));
        let m = Matrix3::identity() * 1.01;
        assert_eq!(RigidTransform::new(m, Vec3::zeros()), Err(GeometryError::NotARotation));
    }

    #[test]
    fn camera_mount_is_proper_rotation() {
        for tilt in [0.0, 0.2, -0.3, 1.0] {
            let m = RigidTransform::camera_mount(1.2, tilt);
            assert!(RigidTransform::new(*m.rotation(), *m.translation()).is_ok());
        }
        let m = RigidTransform::camera_mount(1.0, 0.0);
        // Optical axis looks along base +x.
        assert!((m.apply_vector(&Vec3::z()) - Vec3::x()).norm() < 1e-12);
    }

    #[test]
    fn inverse_and_compose() {
        let t = RigidTransform::from_axis_angle(&Vec3::new(1.0, 2.0, 3.0), 0.7, Vec3::new(0.5, -1.0, 2.0));
        let id = t.compose(&t.inverse());
        let p = Vec3::new(0.3, 0.2, -0.1);
        assert!((id.apply(&p) - p).norm() < 1e-12);
    }

    #[test]
    fn pointing_examples() {
        let o = Vec3::zeros();
        let c = pointing_angles(&Vec3::x(), &o).unwrap();
        assert_eq!((c.yaw, c.pitch), (0.0, 0.0));

        let c = pointing_angles(&Vec3::new(1.0, 1.0, 2f64.sqrt()), &o).unwrap();
        assert!((c.yaw - FRAC_PI_4).abs() < 1e-12);
        assert!((c.pitch - FRAC_PI_4).abs() < 1e-12);

        assert_eq!(pointing_angles(&o, &o), Err(GeometryError::ZeroDirection));
    }

    #[test]
    fn pointing_yaw_range_is_half_open() {
        let c = pointing_angles(&Vec3::new(-1.0, -0.0, 0.0), &Vec3::zeros()).unwrap();
        assert_eq!(c.yaw, PI);
    }

    fn small_vec() -> impl Strategy<Value = Vec3> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn pointing_reconstructs_direction(t in small_vec(), o in small_vec()) {
            prop_assume!((t - o).norm() > 1e-6);
            let c = pointing_angles(&t, &o).unwrap();
            let d = (t - o).normalize();
            prop_assert!((c.unit_direction() - d).norm() < 1e-9);
            prop_assert!(c.yaw > -PI && c.yaw <= PI);
            prop_assert!(c.pitch.abs() <= FRAC_PI_2);
        }

        #[test]
        fn rigid_transforms_preserve_distances(
            axis in small_vec(), angle in -PI..PI, t in small_vec(), a in small_vec(), b in small_vec()
        ) {
            prop_assume!(axis.norm() > 1e-3);
            let tf = RigidTransform::from_axis_angle(&axis, angle, t);
            let d0 = (a - b).norm();
            let d1 = (tf.apply(&a) - tf.apply(&b)).norm();
            prop_assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
        }

        #[test]
        fn project_backproject_round_trip(u in 0.0..639.999f64, v in 0.0..479.999f64, z in 0.05..20.0f64) {
            let i = intr();
            let p = backproject(u, v, z, &i).unwrap();
            let (u2, v2) = project(&p, &i).unwrap();
            let p2 = backproject(u2, v2, p.z, &i).unwrap();
            prop_assert!((p2 - p).norm() <= 1e-9 * p.norm());
        }
    }
}
