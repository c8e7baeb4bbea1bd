//! Two-link arm estimate from HMD and controller poses.

use serde::{Deserialize, Serialize};

use super::PointerState;
use crate::geometry::{Vec3, WORLD_UP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// meters
    pub length: f64,
    /// kg
    pub mass: f64,
    /// Distance of the segment's center of mass from its proximal joint, meters.
    pub com_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub upper_arm: Segment,
    pub forearm: Segment,
    pub hand: Segment,
}

impl Default for ArmModel {
    /// Average adult segment data.
    fn default() -> Self {
        Self {
            upper_arm: Segment {
                length: 0.33,
                mass: 2.1,
                com_offset: 0.132,
            },
            forearm: Segment {
                length: 0.269,
                mass: 1.2,
                com_offset: 0.117,
            },
            hand: Segment {
                length: 0.191,
                mass: 0.4,
                com_offset: 0.07,
            },
        }
    }
}

impl ArmModel {
    pub fn total_mass(&self) -> f64 {
        self.upper_arm.mass + self.forearm.mass + self.hand.mass
    }

    pub fn reach(&self) -> f64 {
        self.upper_arm.length + self.forearm.length
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, s) in [
            ("upper_arm", self.upper_arm),
            ("forearm", self.forearm),
            ("hand", self.hand),
        ] {
            if !(s.length > 0.0 && s.mass > 0.0 && s.com_offset > 0.0) {
                return Err(format!(
                    "{name}: length, mass and com_offset must be positive"
                ));
            }
            if s.com_offset > s.length {
                return Err(format!("{name}: com_offset exceeds length"));
            }
        }
        Ok(())
    }
}

/// Joint positions. `hand` is the distal end of the forearm (the controller
/// grip); the hand segment extends beyond it along the forearm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmPosture {
    pub shoulder: Vec3,
    pub elbow: Vec3,
    pub hand: Vec3,
    /// Set when the controller was out of reach and the hand was pulled in.
    #[serde(default)]
    pub clamped: bool,
}

impl ArmPosture {
    pub fn forearm_direction(&self) -> Vec3 {
        (self.hand - self.elbow).normalize()
    }
}

/// Shoulder offset from the HMD: down, then lateral toward the dominant hand.
pub const SHOULDER_DROP: f64 = 0.22;
pub const SHOULDER_LATERAL: f64 = 0.19;

/// Horizontal right axis of the head, consistent with the controller frame
/// convention `right = up × forward`.
pub fn head_right(hmd_forward: &Vec3) -> Vec3 {
    let flat = Vec3::new(hmd_forward.x, 0.0, hmd_forward.z);
    let forward = if flat.norm() > 1e-9 {
        flat.normalize()
    } else {
        Vec3::z()
    };
    WORLD_UP.cross(&forward)
}

pub fn shoulder_position(hmd_position: &Vec3, hmd_forward: &Vec3) -> Vec3 {
    hmd_position - WORLD_UP * SHOULDER_DROP + head_right(hmd_forward) * SHOULDER_LATERAL
}

/// Places the shoulder relative to the HMD, the hand at the controller, and
/// the elbow on the two-link circle at the point that best aligns the
/// forearm with the pointing direction. When that choice is undefined the
/// elbow hangs in the vertical plane through the shoulder–hand axis.
pub fn estimate_posture(pointer: &PointerState, arm: &ArmModel) -> ArmPosture {
    let shoulder = shoulder_position(&pointer.hmd_position, &pointer.hmd_forward);
    let (lu, lf) = (arm.upper_arm.length, arm.forearm.length);
    let dir = pointer.pointing_direction.normalize();

    let mut to_hand = pointer.controller_position - shoulder;
    let mut d = to_hand.norm();
    let mut clamped = false;
    if d < 1e-9 {
        to_hand = dir;
        d = 0.0;
    }
    let axis = to_hand / to_hand.norm();
    let (min_reach, max_reach) = ((lu - lf).abs() + 1e-9, lu + lf);
    if d > max_reach || d < min_reach {
        d = d.clamp(min_reach, max_reach);
        clamped = true;
    }
    let hand = if clamped {
        shoulder + axis * d
    } else {
        pointer.controller_position
    };

    let along = (d * d + lu * lu - lf * lf) / (2.0 * d);
    let radius = (lu * lu - along * along).max(0.0).sqrt();
    let center = shoulder + axis * along;

    let ideal_elbow = hand - dir * lf;
    let mut offset = ideal_elbow - center;
    offset -= axis * offset.dot(&axis);
    if offset.norm() < 1e-9 {
        offset = -(WORLD_UP - axis * WORLD_UP.dot(&axis));
        if offset.norm() < 1e-9 {
            offset = head_right(&pointer.hmd_forward).cross(&axis);
        }
    }
    let elbow = center + offset.normalize() * radius;
    ArmPosture {
        shoulder,
        elbow,
        hand,
        clamped,
    }
}
