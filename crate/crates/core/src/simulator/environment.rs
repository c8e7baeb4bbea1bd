//! Seeded generation of the four study environments.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Shape, Vec3};
use crate::scene::{Scene, Target, TargetId};

/// Viewer eye position; the region is laid out along +z from here.
pub const EYE: Vec3 = Vec3::new(0.0, 1.6, 0.0);
pub const TARGET_ID: TargetId = TargetId(0);
pub const BOUNDARY_MARGIN: f64 = 0.4;
pub const CENTER_CLEARANCE: f64 = 0.2;
const MAX_ATTEMPTS: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Sparse,
    Dense,
    Flat,
    Deep,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::Sparse,
        EnvKind::Dense,
        EnvKind::Flat,
        EnvKind::Deep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Sparse => "sparse",
            EnvKind::Dense => "dense",
            EnvKind::Flat => "flat",
            EnvKind::Deep => "deep",
        }
    }

    /// Region width, height and depth in meters.
    pub fn dimensions(self) -> [f64; 3] {
        match self {
            EnvKind::Sparse | EnvKind::Dense => [3.0, 3.0, 3.0],
            EnvKind::Flat => [3.0, 3.0, 1.0],
            EnvKind::Deep => [1.5, 1.5, 4.0],
        }
    }

    pub fn object_count(self) -> usize {
        match self {
            EnvKind::Sparse => 10,
            EnvKind::Dense => 240,
            EnvKind::Flat | EnvKind::Deep => 30,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown environment `{s}` (expected sparse, dense, flat or deep)")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub kind: EnvKind,
    /// Width, height, depth, meters.
    pub dimensions: [f64; 3],
    /// Eye to the near face of the region, meters.
    pub distance: f64,
    /// Target plus distractors.
    pub object_count: usize,
    /// Target visual angle, degrees.
    pub target_size: f64,
    /// Distractor visual angle range, degrees.
    pub distractor_size: (f64, f64),
    pub seed: u64,
}

impl EnvironmentSpec {
    pub fn new(kind: EnvKind, target_size: f64, seed: u64) -> Self {
        Self {
            kind,
            dimensions: kind.dimensions(),
            distance: 2.0,
            object_count: kind.object_count(),
            target_size,
            distractor_size: (2.0, 4.0),
            seed,
        }
    }

    pub fn center(&self) -> Vec3 {
        EYE + Vec3::new(0.0, 0.0, self.distance + self.dimensions[2] / 2.0)
    }

    pub fn half_extents(&self) -> Vec3 {
        Vec3::from(self.dimensions) / 2.0
    }

    /// Distance from `p` to the nearest face of the region, negative outside.
    pub fn boundary_clearance(&self, p: &Vec3) -> f64 {
        let d = (p - self.center()).abs();
        let h = self.half_extents();
        (0..3).map(|k| h[k] - d[k]).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<(), EnvironmentError> {
        let bad = |m: &str| Err(EnvironmentError::InvalidSpec(m.to_string()));
        if !self
            .dimensions
            .iter()
            .all(|d| d.is_finite() && *d > 2.0 * BOUNDARY_MARGIN)
        {
            return bad("every region dimension must exceed twice the boundary margin");
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return bad("distance must be positive");
        }
        if self.object_count == 0 {
            return bad("at least the target object is required");
        }
        if !(self.target_size > 0.0 && self.target_size < 90.0) {
            return bad("target size must lie in (0, 90) degrees");
        }
        let (lo, hi) = self.distractor_size;
        if !(lo > 0.0 && lo <= hi && hi < 90.0) {
            return bad("distractor size range must be increasing within (0, 90) degrees");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EnvironmentError {
    #[error("environment spec invalid: {0}")]
    InvalidSpec(String),
    #[error("could not place object {placed} of {total} without intersections")]
    Unsatisfiable { placed: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub spec: EnvironmentSpec,
    pub scene: Scene,
    pub target: TargetId,
}

/// Metric diameter that subtends `angle` degrees from the eye at `p`.
pub fn diameter_for_angle(p: &Vec3, angle: f64) -> f64 {
    2.0 * (p - EYE).norm() * (angle.to_radians() / 2.0).tan()
}

fn uniform_in(rng: &mut ChaCha8Rng, center: &Vec3, half: &Vec3) -> Vec3 {
    Vec3::new(
        center.x + rng.gen_range(-half.x..=half.x),
        center.y + rng.gen_range(-half.y..=half.y),
        center.z + rng.gen_range(-half.z..=half.z),
    )
}

fn random_rotation(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    let q = Quaternion::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    UnitQuaternion::from_quaternion(q)
}

fn target(
    id: u32,
    shape: Shape,
    position: Vec3,
    rotation: UnitQuaternion<f64>,
    diameter: f64,
) -> Target {
    let q = rotation.into_inner();
    Target {
        id: TargetId(id),
        shape,
        position: position.into(),
        rotation_quaternion: [q.i, q.j, q.k, q.w],
        scale: [diameter; 3],
        selectable: true,
    }
}

/// Builds a scene for `spec`: one spherical target (id 0) placed away from
/// the boundary and the center, then distractors of random shape, size and
/// rotation whose bounding spheres never intersect.
pub fn generate_environment(spec: &EnvironmentSpec) -> Result<Environment, EnvironmentError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let center = spec.center();
    let half = spec.half_extents();
    let inner = half.map(|h| h - BOUNDARY_MARGIN);

    let mut targets = Vec::with_capacity(spec.object_count);
    let mut spheres: Vec<(Vec3, f64)> = Vec::with_capacity(spec.object_count);
    let total = spec.object_count;

    let mut placed = false;
    for _ in 0..MAX_ATTEMPTS {
        let p = uniform_in(&mut rng, &center, &inner);
        if (p - center).norm() < CENTER_CLEARANCE {
            continue;
        }
        let d = diameter_for_angle(&p, spec.target_size);
        let t = target(TARGET_ID.0, Shape::Sphere, p, UnitQuaternion::identity(), d);
        spheres.push((p, t.primitive().bounding_radius()));
        targets.push(t);
        placed = true;
        break;
    }
    if !placed {
        return Err(EnvironmentError::Unsatisfiable { placed: 0, total });
    }

    for id in 1..total as u32 {
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let shape = Shape::ALL[rng.gen_range(0..Shape::ALL.len())];
            let p = uniform_in(&mut rng, &center, &half);
            let angle = rng.gen_range(spec.distractor_size.0..=spec.distractor_size.1);
            let rotation = random_rotation(&mut rng);
            let t = target(id, shape, p, rotation, diameter_for_angle(&p, angle));
            let r = t.primitive().bounding_radius();
            if spheres.iter().all(|(q, rq)| (p - q).norm() > r + rq) {
                spheres.push((p, r));
                targets.push(t);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(EnvironmentError::Unsatisfiable {
                placed: id as usize,
                total,
            });
        }
    }
    let scene = Scene::new(targets).expect("generated targets are valid");
    Ok(Environment {
        spec: spec.clone(),
        scene,
        target: TARGET_ID,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        for kind in EnvKind::ALL {
            let spec = EnvironmentSpec::new(kind, 2.5, 42);
            let a = generate_environment(&spec).unwrap();
            assert_eq!(a.scene.len(), kind.object_count());
            let b = generate_environment(&spec).unwrap();
            assert_eq!(a.scene, b.scene);
        }
    }

    #[test]
    fn angular_size_round_trips() {
        let p = EYE + Vec3::new(0.0, 0.0, 3.0);
        let d = diameter_for_angle(&p, 2.5);
        assert!(((d / 2.0 / 3.0).atan() * 2.0).to_degrees() - 2.5 < 1e-12);
    }

    #[test]
    fn parses_kind_names() {
        assert_eq!("Dense".parse::<EnvKind>().unwrap(), EnvKind::Dense);
        assert!("crowded".parse::<EnvKind>().is_err());
    }
}
