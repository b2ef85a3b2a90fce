use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::types::{Action, Gesture};
use crate::geometry::{pointing_angles, GeometryError, RigidTransform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointingConfig {
    /// Shoulder position in the base frame, meters.
    pub arm_origin: Vec3,
    /// Head pivot in the base frame, meters.
    pub head_origin: Vec3,
    /// Closest horizontal distance the robot keeps to the target.
    pub min_standoff: f64,
}

impl Default for PointingConfig {
    fn default() -> Self {
        Self { arm_origin: Vec3::new(0.0, -0.15, 0.95), head_origin: Vec3::new(0.0, 0.0, 1.2), min_standoff: 0.6 }
    }
}

/// Actions that direct attention to `target` (base frame): a base turn when
/// the target is outside the arm's ±90° yaw range, a back-off when closer
/// than the standoff, then head alignment and the pointing gesture.
pub fn gesture_action(target: &Vec3, cfg: &PointingConfig) -> Result<Vec<Action>, GeometryError> {
    let mut actions = Vec::new();
    let mut t = *target;
    let cmd = pointing_angles(&t, &cfg.arm_origin)?;
    if cmd.yaw.abs() > FRAC_PI_2 {
        let angle = t.y.atan2(t.x);
        actions.push(Action::RotateBase { angle });
        t = RigidTransform::from_yaw(-angle, Vec3::zeros()).apply(&t);
    }
    let dist = t.x.hypot(t.y);
    if dist < cfg.min_standoff {
        // Straight back along x until the horizontal range reaches the standoff.
        let back = (cfg.min_standoff * cfg.min_standoff - t.y * t.y).sqrt() - t.x;
        actions.push(Action::Reposition { distance: -back });
        t.x += back;
    }
    let head = pointing_angles(&t, &cfg.head_origin)?;
    actions.push(Action::AlignHead { yaw: head.yaw, pitch: head.pitch });
    let command = pointing_angles(&t, &cfg.arm_origin)?;
    actions.push(Action::Gesture { gesture: Gesture::Point { command } });
    Ok(actions)
}

/// `target` re-expressed in the base frame left by the base motions in `actions`.
pub fn target_after(target: &Vec3, actions: &[Action]) -> Vec3 {
    let mut t = *target;
    for a in actions {
        match a {
            Action::RotateBase { angle } => t = RigidTransform::from_yaw(-angle, Vec3::zeros()).apply(&t),
            Action::Reposition { distance } => t.x -= distance,
            _ => {}
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_of(actions: &[Action]) -> crate::geometry::PointingCommand {
        match actions.last() {
            Some(Action::Gesture { gesture: Gesture::Point { command } }) => *command,
            other => panic!("expected a pointing gesture last, got {other:?}"),
        }
    }

    #[test]
    fn straight_ahead_at_arm_height() {
        let cfg = PointingConfig::default();
        let acts = gesture_action(&(cfg.arm_origin + Vec3::new(1.0, 0.0, 0.0)), &cfg).unwrap();
        assert_eq!(acts.len(), 2);
        assert!(matches!(acts[0], Action::AlignHead { .. }));
        let c = point_of(&acts);
        assert_eq!((c.yaw, c.pitch), (0.0, 0.0));
    }

    #[test]
    fn too_close_repositions_first() {
        let cfg = PointingConfig::default();
        let acts = gesture_action(&Vec3::new(0.3, 0.0, 0.8), &cfg).unwrap();
        match acts[0] {
            Action::Reposition { distance } => assert!((distance + 0.3).abs() < 1e-12),
            ref a => panic!("expected reposition, got {a:?}"),
        }
        assert!(point_of(&acts).direction.x > 0.0);
    }

    #[test]
    fn behind_rotates_base() {
        let cfg = PointingConfig::default();
        let target = Vec3::new(-1.0, 0.2, 0.8);
        let acts = gesture_action(&target, &cfg).unwrap();
        let angle = match acts[0] {
            Action::RotateBase { angle } => angle,
            ref a => panic!("expected rotation, got {a:?}"),
        };
        // Hand arithmetic: atan2(0.2, -1) = π - atan(0.2).
        assert!((angle - (std::f64::consts::PI - 0.2f64.atan())).abs() < 1e-12);
        let c = point_of(&acts);
        assert!(c.yaw.abs() <= FRAC_PI_2);
        // After the turn the target sits on the base x axis at its original range.
        let expect = Vec3::new(1.0f64.hypot(0.2), 0.0, 0.8) - cfg.arm_origin;
        assert!((c.direction - expect).norm() < 1e-12);
    }

    #[test]
    fn zero_direction_propagates() {
        let cfg = PointingConfig { min_standoff: 0.0, ..PointingConfig::default() };
        assert_eq!(gesture_action(&cfg.arm_origin, &cfg), Err(GeometryError::ZeroDirection));
    }

    #[test]
    fn target_follows_base_motion() {
        let cfg = PointingConfig::default();
        for target in [Vec3::new(-1.0, 0.5, 0.8), Vec3::new(0.2, 0.1, 0.7), Vec3::new(1.5, -0.3, 0.9)] {
            let acts = gesture_action(&target, &cfg).unwrap();
            let moved = target_after(&target, &acts);
            // Pointing again from the new frame needs no further motion.
            let again = gesture_action(&moved, &cfg).unwrap();
            assert!(again.iter().all(|a| !matches!(a, Action::RotateBase { .. } | Action::Reposition { .. })), "{again:?}");
            assert!((point_of(&again).yaw - point_of(&acts).yaw).abs() < 1e-9);
        }
    }
}
