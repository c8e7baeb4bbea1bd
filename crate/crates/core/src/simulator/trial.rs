//! Scripted selection trials.
//!
//! The simulated user holds the elbow still and rotates the forearm toward
//! the aim point of the active technique at a constant angular speed, with
//! per-frame Gaussian tremor. Once the designated target has stayed
//! highlighted for the dwell time the trigger is pressed on the next frame,
//! and whatever is highlighted then is selected.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Unit, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::environment::EYE;
use crate::adapter::{step, technique_regions, AdapterState};
use crate::config::AdapterConfig;
use crate::geometry::{AngularPoint, ControllerFrame, Polygon2D, Vec3};
use crate::scene::{extract_context, PointerState, Scene, TargetId};
use crate::techniques::{highlight, Technique, TechniqueState, MIN_CURSOR_DEPTH};
use crate::trace::{Trace, TraceFrame, TraceHeader};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    /// deg/s
    pub angular_speed: f64,
    /// Per-frame tremor, degrees per axis.
    pub tremor_sigma: f64,
    /// Seconds the highlight must hold before the trigger.
    pub dwell: f64,
    /// Hz
    pub frame_rate: f64,
    /// Cursor swipe speed, m/s.
    pub depth_speed: f64,
    /// Sideways hand speed while looking around an occluder, m/s.
    pub reposition_speed: f64,
    /// Furthest sideways hand offset, meters.
    pub reposition_range: f64,
    /// Seconds the hand rests at the ready pose before moving.
    #[serde(default = "default_reaction_time")]
    pub reaction_time: f64,
    /// Seconds.
    pub timeout: f64,
}

fn default_reaction_time() -> f64 {
    0.4
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            angular_speed: 90.0,
            tremor_sigma: 0.2,
            dwell: 0.15,
            frame_rate: 90.0,
            depth_speed: 2.0,
            reposition_speed: 0.3,
            reposition_range: 0.3,
            reaction_time: default_reaction_time(),
            timeout: 15.0,
        }
    }
}

impl TrajectoryParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("angular_speed", self.angular_speed),
            ("dwell", self.dwell),
            ("frame_rate", self.frame_rate),
            ("depth_speed", self.depth_speed),
            ("reposition_speed", self.reposition_speed),
            ("reposition_range", self.reposition_range),
            ("timeout", self.timeout),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive"));
            }
        }
        if !(self.tremor_sigma.is_finite() && self.tremor_sigma >= 0.0) {
            return Err("tremor_sigma must be non-negative".into());
        }
        if !(self.reaction_time.is_finite() && self.reaction_time >= 0.0) {
            return Err("reaction_time must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TrialMode {
    Fixed(Technique),
    Adaptive,
}

impl TrialMode {
    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TrialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialMode::Adaptive => f.write_str("adaptive"),
            TrialMode::Fixed(t) => f.write_str(&t.name().to_ascii_lowercase()),
        }
    }
}

impl FromStr for TrialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(TrialMode::Adaptive);
        }
        s.parse::<Technique>().map(TrialMode::Fixed).map_err(|_| {
            format!("unknown mode `{s}` (expected adaptive, raycasting, stickyray or raycursor)")
        })
    }
}

impl From<TrialMode> for String {
    fn from(m: TrialMode) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for TrialMode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSwitch {
    /// Seconds since trial start.
    pub t: f64,
    pub frame: u64,
    pub from: Technique,
    pub to: Technique,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub success: bool,
    pub selection_time: f64,
    /// Controller path length, meters.
    pub translational_movement: f64,
    /// Summed frame-to-frame pointing rotation, degrees.
    pub rotational_movement: f64,
    pub error_count: u32,
    pub switches: Vec<TrialSwitch>,
    pub final_technique: Technique,
    pub timeout: bool,
    pub frames: u64,
}

/// Config actually run for a mode: fixed modes score only their technique.
pub fn effective_config(config: &AdapterConfig, mode: TrialMode) -> AdapterConfig {
    match mode {
        TrialMode::Adaptive => config.clone(),
        TrialMode::Fixed(t) => {
            let mut c = config.clone();
            c.techniques = vec![t];
            c.initial_technique = t;
            if !c.familiarity.contains_key(&t) {
                let fallback = AdapterConfig::application().familiarity[&t];
                c.familiarity.insert(t, fallback);
            }
            c
        }
    }
}

/// Starting pose: controller at the default hand position pointing at
/// `ready`, head level and facing +z.
pub fn ready_pointer(ready: &Vec3) -> PointerState {
    let mut p = PointerState {
        hmd_position: EYE,
        hmd_forward: Vec3::z(),
        ..PointerState::default()
    };
    p.pointing_direction = (ready - p.controller_position).normalize();
    p
}

fn rotate_toward(from: &Vec3, to: &Vec3, max_deg: f64) -> Vec3 {
    let angle = from.dot(to).clamp(-1.0, 1.0).acos();
    if angle <= max_deg.to_radians() || angle < 1e-12 {
        return *to;
    }
    let axis = from.cross(to);
    let axis = if axis.norm() > 1e-12 {
        Unit::new_normalize(axis)
    } else {
        Unit::new_normalize(from.cross(&Vec3::y()))
    };
    (UnitQuaternion::from_axis_angle(&axis, max_deg.to_radians()) * from).normalize()
}

/// A point well inside `outline`: the centroid or a centroid-to-vertex
/// midpoint, whichever lies deepest. Falls back to the centroid.
fn interior_point(outline: &Polygon2D, centroid: AngularPoint) -> AngularPoint {
    let n = outline.vertices.len();
    let stride = (n / 64).max(1);
    std::iter::once(centroid)
        .chain(
            outline
                .vertices
                .iter()
                .step_by(stride)
                .map(|v| AngularPoint::new((centroid.h + v.h) / 2.0, (centroid.v + v.v) / 2.0)),
        )
        .filter(|&p| outline.contains(p))
        .map(|p| (outline.boundary_distance(p), p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(centroid, |(_, p)| p)
}

fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.normalize()
        .dot(&b.normalize())
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees()
}

/// Runs one trial. Returns the result and the full decision trace.
pub fn run_trial(
    scene: &Scene,
    target: TargetId,
    ready: &Vec3,
    mode: TrialMode,
    traj: &TrajectoryParams,
    config: &AdapterConfig,
    seed: u64,
) -> (TrialResult, Trace) {
    let config = effective_config(config, mode);
    let mut header = TraceHeader::new(&config, scene);
    header.target = Some(target);
    let mut trace = Trace::new(header);

    let target_pos = scene
        .get(target)
        .map(|t| Vec3::from(t.position))
        .expect("target exists");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / traj.frame_rate;
    let forearm = config.arm.forearm.length;

    let start = ready_pointer(ready);
    let elbow = start.controller_position - start.pointing_direction * forearm;
    let mut dir = start.pointing_direction;
    let mut offset = Vec3::zeros();
    let mut sidestep = 1.0;
    let mut swipe = 0.0;
    let mut trigger_next = false;

    let mut state = AdapterState::new(&config);
    let mut tech = TechniqueState::new(config.initial_technique);
    tech.transfer = config.transfer;

    let mut result = TrialResult {
        success: false,
        selection_time: traj.timeout,
        translational_movement: 0.0,
        rotational_movement: 0.0,
        error_count: 0,
        switches: Vec::new(),
        final_technique: tech.kind,
        timeout: false,
        frames: 0,
    };
    let mut held = 0.0;
    let mut prev: Option<(Vec3, Vec3)> = None;
    let max_frames = (traj.timeout * traj.frame_rate).round() as u64;

    for k in 0..=max_frames {
        let t = k as f64 * dt;
        let pointer = PointerState {
            controller_position: elbow + offset + dir * forearm,
            pointing_direction: dir,
            trigger: trigger_next,
            trackpad_delta: swipe,
            timestamp: t,
            ..start.clone()
        };
        if let Some((p0, d0)) = prev {
            result.translational_movement += (pointer.controller_position - p0).norm();
            result.rotational_movement += angle_deg(&d0, &dir);
        }
        prev = Some((pointer.controller_position, dir));
        result.frames = k + 1;

        let ctx = match extract_context(scene, &pointer, &config.arm, config.cone_radius) {
            Ok(ctx) => ctx,
            Err(_) => break,
        };
        let regions = technique_regions(scene, &ctx, &config);
        let decision = step(&ctx, &regions, &config, &mut state, false);
        if let Some(to) = decision.new_technique {
            result.switches.push(TrialSwitch {
                t,
                frame: decision.frame,
                from: tech.kind,
                to,
            });
            tech.switch_to(to);
        }
        trace
            .frames
            .push(TraceFrame::new(&pointer, &decision, false));
        let lit = highlight(&mut tech, &ctx, &pointer);

        if trigger_next {
            trigger_next = false;
            if lit == Some(target) {
                result.success = true;
                result.selection_time = t;
                break;
            }
            result.error_count += 1;
            held = 0.0;
        }
        if k == max_frames {
            result.timeout = true;
            break;
        }
        if lit == Some(target) && t + 1e-9 >= traj.reaction_time {
            held += dt;
            if held + 1e-9 >= traj.dwell {
                trigger_next = true;
            }
        } else {
            held = 0.0;
        }

        // Where to point next.
        let frame = ctx.frame;
        let tc = ctx.target(target);
        let center_dir = (target_pos - pointer.controller_position).normalize();
        // less than half the silhouette showing counts as occluded
        let visible = tc.is_some_and(|c| c.outline.area() >= 0.5 * c.raw_area);
        let aim = match tech.kind {
            Technique::RayCursor => center_dir,
            _ => tc
                .and_then(|c| c.centroid.map(|m| interior_point(&c.outline, m)))
                .map(|p| frame.direction(p))
                .unwrap_or(center_dir),
        };

        swipe = 0.0;
        let moving = t + 1e-9 >= traj.reaction_time;
        let aim = if moving { aim } else { dir };
        if moving
            && tech.kind == Technique::RayCursor
            && lit != Some(target)
            && angle_deg(&dir, &center_dir) < 10.0
        {
            let goal = frame.to_local(&target_pos).z.max(MIN_CURSOR_DEPTH);
            let step_m =
                (goal - tech.cursor_depth).clamp(-traj.depth_speed * dt, traj.depth_speed * dt);
            let speed = angle_deg(&dir, &aim).min(traj.angular_speed * dt) / dt;
            swipe = step_m / tech.transfer.gain(speed);
        }
        if moving && tech.kind != Technique::RayCursor && tc.is_some() && !visible {
            let next = offset.x + sidestep * traj.reposition_speed * dt;
            if next.abs() > traj.reposition_range {
                sidestep = -sidestep;
            }
            offset.x += sidestep * traj.reposition_speed * dt;
        }

        let mut next = rotate_toward(&dir, &aim, traj.angular_speed * dt);
        if traj.tremor_sigma > 0.0 {
            let basis = ControllerFrame::new(Vec3::zeros(), next).map(|f| (f.right, f.up));
            if let Ok((right, up)) = basis {
                let h: f64 = rng.sample::<f64, _>(StandardNormal) * traj.tremor_sigma;
                let v: f64 = rng.sample::<f64, _>(StandardNormal) * traj.tremor_sigma;
                next =
                    (next + right * h.to_radians().tan() + up * v.to_radians().tan()).normalize();
            }
        }
        dir = next;
    }
    result.final_technique = tech.kind;
    (result, trace)
}
