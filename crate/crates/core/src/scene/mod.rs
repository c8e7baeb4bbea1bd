//! Scene model, interaction-cone filtering and per-frame context extraction.

mod arm;
mod context;
mod document;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

pub use arm::{estimate_posture, head_right, shoulder_position, ArmModel, ArmPosture, Segment};
pub use context::{extract_context, filter_interaction_space, ContextFrame, TargetContext};
pub use document::{load_scene, Scene, SceneError, Target, TargetId, SCENE_VERSION};

/// One tracked input sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerState {
    pub controller_position: Vec3,
    pub pointing_direction: Vec3,
    pub hmd_position: Vec3,
    pub hmd_forward: Vec3,
    #[serde(default)]
    pub trigger: bool,
    /// Signed touchpad swipe this frame; positive pushes the depth cursor away.
    #[serde(default)]
    pub trackpad_delta: f64,
    /// seconds
    #[serde(default)]
    pub timestamp: f64,
}

impl Default for PointerState {
    fn default() -> Self {
        Self {
            controller_position: Vec3::new(0.19, 1.35, 0.35),
            pointing_direction: Vec3::z(),
            hmd_position: Vec3::new(0.0, 1.6, 0.0),
            hmd_forward: Vec3::z(),
            trigger: false,
            trackpad_delta: 0.0,
            timestamp: 0.0,
        }
    }
}

impl PointerState {
    /// Checks finiteness and that both direction vectors are unit length.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
        if ![
            self.controller_position,
            self.pointing_direction,
            self.hmd_position,
            self.hmd_forward,
        ]
        .iter()
        .all(finite)
            || !self.trackpad_delta.is_finite()
            || !self.timestamp.is_finite()
        {
            return Err("pointer fields must be finite".into());
        }
        for (name, v) in [
            ("pointing_direction", self.pointing_direction),
            ("hmd_forward", self.hmd_forward),
        ] {
            if (v.norm() - 1.0).abs() > 1e-6 {
                return Err(format!("{name} must be unit length"));
            }
        }
        Ok(())
    }
}
