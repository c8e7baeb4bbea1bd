use serde::{Deserialize, Serialize};

use super::Technique;
use crate::geometry::{AngularPoint, Vec3};
use crate::scene::{ContextFrame, PointerState, TargetContext, TargetId};

pub const MIN_CURSOR_DEPTH: f64 = 0.1;
/// Seconds the touchpad must stay idle before snapping resumes.
pub const SNAP_REENABLE_AFTER: f64 = 1.0;

/// Depth-cursor gain: meters per unit swipe, rising linearly with controller
/// angular speed up to `speed_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub base_gain: f64,
    pub speed_gain: f64,
    /// deg/s
    pub speed_cap: f64,
}

impl Default for TransferFunction {
    fn default() -> Self {
        Self {
            base_gain: 0.5,
            speed_gain: 2.0,
            speed_cap: 90.0,
        }
    }
}

impl TransferFunction {
    pub fn gain(&self, angular_speed: f64) -> f64 {
        self.base_gain + self.speed_gain * angular_speed.abs().min(self.speed_cap) / self.speed_cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueState {
    pub kind: Technique,
    /// RayCursor depth along the ray, meters.
    pub cursor_depth: f64,
    /// Last time the touchpad was swiped, seconds.
    pub last_trackpad_release: Option<f64>,
    pub transfer: TransferFunction,
    last_direction: Option<Vec3>,
    last_timestamp: Option<f64>,
}

impl TechniqueState {
    pub fn new(kind: Technique) -> Self {
        Self {
            kind,
            cursor_depth: 1.0,
            last_trackpad_release: None,
            transfer: TransferFunction::default(),
            last_direction: None,
            last_timestamp: None,
        }
    }

    /// Whether RayCursor snapping is active at time `now`.
    pub fn snapping_active(&self, now: f64) -> bool {
        self.last_trackpad_release
            .is_none_or(|t| now - t > SNAP_REENABLE_AFTER)
    }

    /// Switches technique, keeping cursor and timing state.
    pub fn switch_to(&mut self, kind: Technique) {
        self.kind = kind;
    }
}

/// Depth along the ray of the first surface the ray meets, using bounding
/// spheres for the surface. `None` when the ray misses every visible target.
pub fn ray_hit_depth(ctx: &ContextFrame) -> Option<(TargetId, f64)> {
    let hit = raycast_hit(ctx)?;
    let c = hit.position_3d;
    let r = hit.bounding_radius;
    let perp2 = c.x * c.x + c.y * c.y;
    let depth = if perp2 <= r * r {
        c.z - (r * r - perp2).sqrt()
    } else {
        c.z
    };
    Some((hit.id, depth.max(MIN_CURSOR_DEPTH)))
}

fn raycast_hit(ctx: &ContextFrame) -> Option<&TargetContext> {
    ctx.targets
        .iter()
        .filter(|t| t.is_visible() && t.outline.contains(AngularPoint::ORIGIN))
        .min_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)))
}

fn sticky_nearest(ctx: &ContextFrame) -> Option<&TargetContext> {
    ctx.targets
        .iter()
        .filter(|t| t.is_visible())
        .map(|t| (t.outline.distance_to(AngularPoint::ORIGIN), t))
        .min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.distance.total_cmp(&b.1.distance))
                .then(a.1.id.cmp(&b.1.id))
        })
        .map(|(_, t)| t)
}

fn cursor_nearest(ctx: &ContextFrame, depth: f64) -> Option<&TargetContext> {
    let cursor = Vec3::new(0.0, 0.0, depth);
    ctx.targets
        .iter()
        .map(|t| ((t.position_3d - cursor).norm() - t.bounding_radius, t))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)))
        .map(|(_, t)| t)
}

/// Highlighted target for the state's technique, updating RayCursor depth
/// and timing from this pointer sample.
pub fn highlight(
    state: &mut TechniqueState,
    ctx: &ContextFrame,
    pointer: &PointerState,
) -> Option<TargetId> {
    let dir = pointer.pointing_direction;
    let speed = match (state.last_direction, state.last_timestamp) {
        (Some(prev), Some(t0)) if pointer.timestamp > t0 => {
            prev.normalize()
                .dot(&dir.normalize())
                .clamp(-1.0, 1.0)
                .acos()
                .to_degrees()
                / (pointer.timestamp - t0)
        }
        _ => 0.0,
    };
    state.last_direction = Some(dir);
    state.last_timestamp = Some(pointer.timestamp);

    if pointer.trackpad_delta != 0.0 {
        state.cursor_depth += pointer.trackpad_delta * state.transfer.gain(speed);
        state.last_trackpad_release = Some(pointer.timestamp);
    } else if state.kind == Technique::RayCursor && state.snapping_active(pointer.timestamp) {
        if let Some((_, depth)) = ray_hit_depth(ctx) {
            state.cursor_depth = depth;
        }
    }
    state.cursor_depth = state.cursor_depth.max(MIN_CURSOR_DEPTH);

    match state.kind {
        Technique::RayCasting => raycast_hit(ctx).map(|t| t.id),
        Technique::StickyRay => sticky_nearest(ctx).map(|t| t.id),
        Technique::RayCursor => cursor_nearest(ctx, state.cursor_depth).map(|t| t.id),
    }
}
