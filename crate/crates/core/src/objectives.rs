//! Objective models: speed (Shannon index of difficulty), accuracy (endpoint
//! distribution mass over the activation box), comfort (summed shoulder
//! torque along the pointing sweep) and familiarity, plus min-max
//! normalization.

use std::collections::BTreeMap;

use nalgebra::{Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::scene::{ArmModel, ArmPosture};
use crate::techniques::{AccuracyBox, ActivationRegion, Technique};

pub const GRAVITY: Vec3 = Vec3::new(0.0, -9.81, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Speed,
    Accuracy,
    Comfort,
    Familiarity,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Speed,
        Objective::Accuracy,
        Objective::Comfort,
        Objective::Familiarity,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub speed: f64,
    pub accuracy: f64,
    pub comfort: f64,
    pub familiarity: f64,
}

impl ObjectiveVector {
    pub fn get(&self, o: Objective) -> f64 {
        match o {
            Objective::Speed => self.speed,
            Objective::Accuracy => self.accuracy,
            Objective::Comfort => self.comfort,
            Objective::Familiarity => self.familiarity,
        }
    }

    pub fn set(&mut self, o: Objective, value: f64) {
        match o {
            Objective::Speed => self.speed = value,
            Objective::Accuracy => self.accuracy = value,
            Objective::Comfort => self.comfort = value,
            Objective::Familiarity => self.familiarity = value,
        }
    }

    pub fn map(&self, mut f: impl FnMut(Objective, f64) -> f64) -> Self {
        let mut out = *self;
        for o in Objective::ALL {
            out.set(o, f(o, self.get(o)));
        }
        out
    }
}

// ── speed ────────────────────────────────────────────────────

/// Negated Shannon index of difficulty, `-log2(A/W + 1)`.
pub fn index_of_difficulty_score(amplitude: f64, width: f64) -> f64 {
    -(amplitude / width + 1.0).log2()
}

/// Raw speed score of a region; `None` when the region is unselectable.
pub fn score_speed(region: &ActivationRegion) -> Option<f64> {
    (region.selectable && region.width > 0.0)
        .then(|| index_of_difficulty_score(region.amplitude, region.width))
}

// ── accuracy ─────────────────────────────────────────────────

/// Error function, Abramowitz & Stegun 7.1.26 (|error| ≤ 1.5e-7).
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    const P: f64 = 0.327_591_1;
    const A: [f64; 5] = [
        0.254_829_592,
        -0.284_496_736,
        1.421_413_741,
        -1.453_152_027,
        1.061_405_429,
    ];
    let z = x.abs();
    let t = 1.0 / (1.0 + P * z);
    let poly = t * (A[0] + t * (A[1] + t * (A[2] + t * (A[3] + t * A[4]))));
    let y = 1.0 - poly * (-z * z).exp();
    if x < 0.0 {
        -y
    } else {
        y
    }
}

/// Linear endpoint-distribution regressions in degrees:
/// `value = a·A + w·W + c` for the mean offset and both deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdModelParams {
    pub mu_coeffs: [f64; 3],
    pub sigma_x_coeffs: [f64; 3],
    pub sigma_y_coeffs: [f64; 3],
    /// +1 places the mean offset along the movement direction, -1 against it.
    #[serde(default = "one")]
    pub mu_sign: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for EdModelParams {
    fn default() -> Self {
        Self {
            mu_coeffs: [0.0, -0.1441, 0.2649],
            sigma_x_coeffs: [0.0066, 0.1025, 0.2663],
            sigma_y_coeffs: [0.0085, 0.0679, 0.1437],
            mu_sign: 1.0,
        }
    }
}

impl EdModelParams {
    fn eval(c: &[f64; 3], amplitude: f64, width: f64) -> f64 {
        c[0] * amplitude + c[1] * width + c[2]
    }

    /// `(μ, σ_x, σ_y)` for a movement of amplitude `A` to a target of width `W`.
    pub fn evaluate(&self, amplitude: f64, width: f64) -> (f64, f64, f64) {
        (
            self.mu_sign * Self::eval(&self.mu_coeffs, amplitude, width),
            Self::eval(&self.sigma_x_coeffs, amplitude, width),
            Self::eval(&self.sigma_y_coeffs, amplitude, width),
        )
    }
}

/// Probability that a normal variable with mean `mu` and deviation `sigma`
/// lands between `a` and `b`, whichever order they come in.
pub fn normal_interval(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * sigma;
    (0.5 * (erf((b - mu) / s) - erf((a - mu) / s))).abs()
}

/// Mass of the endpoint distribution `N((μ, 0), diag(σ_x², σ_y²))` over the box.
pub fn box_probability(bbox: &AccuracyBox, mu: f64, sigma_x: f64, sigma_y: f64) -> f64 {
    let p = normal_interval(bbox.x1, bbox.x2, mu, sigma_x)
        * normal_interval(bbox.y2, bbox.y1, 0.0, sigma_y);
    p.clamp(0.0, 1.0)
}

/// Selection probability of a region; 0 when unselectable.
pub fn score_accuracy(region: &ActivationRegion, params: &EdModelParams) -> f64 {
    if !region.selectable {
        return 0.0;
    }
    let (mu, sx, sy) = params.evaluate(region.amplitude, region.width);
    if !(sx > 0.0 && sy > 0.0) {
        return 0.0;
    }
    box_probability(&region.bbox, mu, sx, sy)
}

// ── comfort ──────────────────────────────────────────────────

/// Center of mass of the whole arm. The hand segment continues along the forearm.
pub fn arm_center_of_mass(posture: &ArmPosture, arm: &ArmModel) -> Vec3 {
    let upper_dir = (posture.elbow - posture.shoulder).normalize();
    let fore_dir = (posture.hand - posture.elbow).normalize();
    let upper = posture.shoulder + upper_dir * arm.upper_arm.com_offset;
    let fore = posture.elbow + fore_dir * arm.forearm.com_offset;
    let hand = posture.hand + fore_dir * arm.hand.com_offset;
    (upper * arm.upper_arm.mass + fore * arm.forearm.mass + hand * arm.hand.mass) / arm.total_mass()
}

/// Magnitude of the gravitational torque about the shoulder, N·m.
pub fn shoulder_torque(posture: &ArmPosture, arm: &ArmModel) -> f64 {
    let r = arm_center_of_mass(posture, arm) - posture.shoulder;
    r.cross(&(GRAVITY * arm.total_mass())).norm()
}

/// Torque with the whole arm held straight and horizontal, the worst case.
pub fn horizontal_torque(arm: &ArmModel) -> f64 {
    let shoulder = Vec3::zeros();
    let elbow = Vec3::z() * arm.upper_arm.length;
    let hand = elbow + Vec3::z() * arm.forearm.length;
    shoulder_torque(
        &ArmPosture {
            shoulder,
            elbow,
            hand,
            clamped: false,
        },
        arm,
    )
}

/// Rotation angles sampled along a sweep of `sweep` degrees in `beta`
/// steps, both ends included.
pub fn sweep_angles(sweep: f64, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if sweep <= 1e-9 {
        return out;
    }
    let mut k = 1.0;
    while k * beta < sweep - 1e-9 {
        out.push(k * beta);
        k += 1.0;
    }
    out.push(sweep);
    out
}

/// Postures visited while the forearm rotates about the fixed elbow by the
/// rotation that carries `from` onto `to`, sampled every `beta` degrees.
pub fn sweep_postures(posture: &ArmPosture, from: &Vec3, to: &Vec3, beta: f64) -> Vec<ArmPosture> {
    let (a, b) = (from.normalize(), to.normalize());
    let sweep = a.dot(&b).clamp(-1.0, 1.0).acos().to_degrees();
    let axis = {
        let c = a.cross(&b);
        if c.norm() > 1e-12 {
            c
        } else {
            let helper = if a.x.abs() < 0.9 {
                Vec3::x()
            } else {
                Vec3::y()
            };
            a.cross(&helper)
        }
    };
    let axis = Unit::new_normalize(axis);
    let forearm = posture.hand - posture.elbow;
    sweep_angles(sweep, beta)
        .into_iter()
        .map(|deg| {
            let rot = UnitQuaternion::from_axis_angle(&axis, deg.to_radians());
            ArmPosture {
                hand: posture.elbow + rot * forearm,
                ..*posture
            }
        })
        .collect()
}

/// Negated sum of shoulder torques along the sweep from the current pointing
/// direction to the aim direction (world space).
pub fn score_comfort(
    posture: &ArmPosture,
    current: &Vec3,
    aim: &Vec3,
    arm: &ArmModel,
    beta: f64,
) -> f64 {
    -sweep_postures(posture, current, aim, beta)
        .iter()
        .map(|p| shoulder_torque(p, arm))
        .sum::<f64>()
}

// ── familiarity ──────────────────────────────────────────────

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("no familiarity score configured for {0}")]
    UnknownTechnique(Technique),
}

/// Per-technique familiarity constants in `[0, 1]`.
pub type FamiliarityTable = BTreeMap<Technique, f64>;

pub fn score_familiarity(
    technique: Technique,
    table: &FamiliarityTable,
) -> Result<f64, ObjectiveError> {
    table
        .get(&technique)
        .copied()
        .ok_or(ObjectiveError::UnknownTechnique(technique))
}

// ── normalization ────────────────────────────────────────────

/// `(s_min, s_max)` per objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub speed: (f64, f64),
    pub accuracy: (f64, f64),
    pub comfort: (f64, f64),
    pub familiarity: (f64, f64),
}

/// Smallest displayable target width, degrees.
pub const MIN_WIDTH: f64 = 0.05;

impl NormalizationBounds {
    /// Limits implied by the cone radius, the display floor and the most
    /// strenuous sweep across the whole cone.
    pub fn derive(cone_radius: f64, beta: f64, arm: &ArmModel) -> Self {
        Self {
            speed: (index_of_difficulty_score(cone_radius, MIN_WIDTH), 0.0),
            accuracy: (0.0, 1.0),
            comfort: (-horizontal_torque(arm) * (cone_radius / beta + 1.0), 0.0),
            familiarity: (0.0, 1.0),
        }
    }

    pub fn get(&self, o: Objective) -> (f64, f64) {
        match o {
            Objective::Speed => self.speed,
            Objective::Accuracy => self.accuracy,
            Objective::Comfort => self.comfort,
            Objective::Familiarity => self.familiarity,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for o in Objective::ALL {
            let (lo, hi) = self.get(o);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(format!("{o:?} bounds need s_min < s_max"));
            }
        }
        Ok(())
    }
}

/// Min-max normalization clamped to `[0, 1]`.
pub fn normalize(raw: f64, bounds: (f64, f64)) -> f64 {
    ((raw - bounds.0) / (bounds.1 - bounds.0)).clamp(0.0, 1.0)
}
