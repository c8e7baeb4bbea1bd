//! Per-frame contextual extraction: which targets sit in the interaction
//! cone, their occlusion-clipped outlines in the control space, and the
//! user's arm posture.

use rayon::prelude::*;
use serde::Serialize;

use super::{estimate_posture, ArmModel, ArmPosture, PointerState, Scene, Target, TargetId};
use crate::geometry::{
    centroid, clip_convex_to_disk, convex_may_overlap, polygon_difference,
    primitive::DEFAULT_LEVEL, project_local, project_primitive, AngularPoint, ControllerFrame,
    GeometryError, Polygon2D, Vec3,
};

/// One in-cone target as seen from the controller.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetContext {
    pub id: TargetId,
    #[serde(skip)]
    pub scene_index: usize,
    /// Occlusion- and cone-clipped outline; empty when fully occluded.
    pub outline: Polygon2D,
    /// Area of the unclipped silhouette, deg².
    pub raw_area: f64,
    /// Centroid of `outline`; `None` when the outline is empty.
    pub centroid: Option<AngularPoint>,
    /// Projection of the target's center, if it lies in front.
    pub center_2d: Option<AngularPoint>,
    /// Center in controller coordinates `(right, up, forward)`, meters.
    pub position_3d: Vec3,
    /// Distance from the controller to the center, meters.
    pub distance: f64,
    /// Control-space distance from the pointing axis to the centroid (or the
    /// projected center when fully occluded), degrees.
    pub angular_distance: f64,
    pub bounding_radius: f64,
}

impl TargetContext {
    /// Whether any part is visible in 2D.
    pub fn is_visible(&self) -> bool {
        self.centroid.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextFrame {
    pub targets: Vec<TargetContext>,
    pub posture: ArmPosture,
    pub pointer: PointerState,
    pub frame: ControllerFrame,
    /// Interaction cone radius, degrees.
    pub cone_radius: f64,
}

impl ContextFrame {
    pub fn target(&self, id: TargetId) -> Option<&TargetContext> {
        self.targets.iter().find(|t| t.id == id)
    }
}

/// Conservative bounding cone of a target seen from the controller.
#[derive(Debug, Clone, Copy)]
struct BoundCone {
    dir: Vec3,
    /// Half-angle, radians; π when the controller is inside the bound.
    half_angle: f64,
    local: Vec3,
    distance: f64,
}

impl BoundCone {
    fn new(frame: &ControllerFrame, target: &Target, radius: f64) -> Self {
        let local = frame.to_local(&Vec3::from(target.position));
        let distance = local.norm();
        if distance <= radius * 1.0001 || distance < 1e-9 {
            return Self {
                dir: Vec3::z(),
                half_angle: std::f64::consts::PI,
                local,
                distance,
            };
        }
        Self {
            dir: local / distance,
            half_angle: (radius / distance).asin(),
            local,
            distance,
        }
    }

    /// True angle from the pointing axis minus the half-angle, radians.
    fn axis_gap(&self) -> f64 {
        self.dir.z.clamp(-1.0, 1.0).acos() - self.half_angle
    }

    fn overlaps(&self, other: &BoundCone) -> bool {
        let between = self.dir.dot(&other.dir).clamp(-1.0, 1.0).acos();
        between <= self.half_angle + other.half_angle + 1e-9
    }
}

struct Prepared<'a> {
    frame: ControllerFrame,
    cones: Vec<BoundCone>,
    radii: &'a [f64],
    candidates: Vec<usize>,
    outlines: Vec<Option<Polygon2D>>,
    scene: &'a Scene,
}

fn prepare<'a>(
    scene: &'a Scene,
    pointer: &PointerState,
    cone_radius: f64,
) -> Result<Prepared<'a>, GeometryError> {
    let frame = ControllerFrame::new(pointer.controller_position, pointer.pointing_direction)?;
    let radii = scene.bounding_radii();
    let cones: Vec<BoundCone> = scene
        .targets()
        .iter()
        .zip(radii)
        .map(|(t, &r)| BoundCone::new(&frame, t, r))
        .collect();
    // The control-space disk lies inside the true cone of the same radius,
    // so the true-angle test never drops a target that could intersect it.
    let limit = cone_radius.to_radians();
    let candidates: Vec<usize> = (0..cones.len())
        .filter(|&i| cones[i].axis_gap() <= limit + 1e-9)
        .collect();
    let mut relevant = vec![false; cones.len()];
    for &c in &candidates {
        relevant[c] = true;
    }
    // only a nearer silhouette can occlude a candidate
    let targets = scene.targets();
    let key = |j: usize| (cones[j].distance, targets[j].id);
    for (i, cone) in cones.iter().enumerate() {
        if !relevant[i]
            && candidates
                .iter()
                .any(|&c| key(i) < key(c) && cones[c].overlaps(cone))
        {
            relevant[i] = true;
        }
    }
    let outlines: Vec<Option<Polygon2D>> = scene
        .primitives()
        .par_iter()
        .zip(relevant.par_iter())
        .map(|(p, &rel)| rel.then(|| project_primitive(p, &frame, DEFAULT_LEVEL)))
        .collect();
    Ok(Prepared {
        frame,
        cones,
        radii,
        candidates,
        outlines,
        scene,
    })
}

impl Prepared<'_> {
    fn in_cone(&self, cone_radius: f64) -> Vec<usize> {
        self.candidates
            .iter()
            .copied()
            .filter(|&i| {
                self.outlines[i]
                    .as_ref()
                    .is_some_and(|o| o.intersects_disk(cone_radius))
            })
            .collect()
    }

    /// Targets nearer than `i` (ties by id) whose silhouettes may overlap it.
    fn occluders(&self, i: usize) -> Vec<&Polygon2D> {
        let targets = self.scene.targets();
        let key = |j: usize| (self.cones[j].distance, targets[j].id);
        let mine = key(i);
        (0..targets.len())
            .filter(|&j| j != i)
            .filter(|&j| {
                let k = key(j);
                k.0 < mine.0 || (k.0 == mine.0 && k.1 < mine.1)
            })
            .filter(|&j| self.cones[i].overlaps(&self.cones[j]))
            .filter_map(|j| self.outlines[j].as_ref())
            .collect()
    }
}

/// Targets whose projected outline meets the interaction cone.
pub fn filter_interaction_space<'a>(
    scene: &'a Scene,
    pointer: &PointerState,
    cone_radius: f64,
) -> Result<Vec<&'a Target>, GeometryError> {
    let prep = prepare(scene, pointer, cone_radius)?;
    Ok(prep
        .in_cone(cone_radius)
        .into_iter()
        .map(|i| &scene.targets()[i])
        .collect())
}

/// Builds the [`ContextFrame`] for one pointer sample.
///
/// Outlines are cone-clipped and then reduced by the silhouettes of every
/// nearer target, in or out of the cone. Non-selectable targets occlude but
/// are not reported.
pub fn extract_context(
    scene: &Scene,
    pointer: &PointerState,
    arm: &ArmModel,
    cone_radius: f64,
) -> Result<ContextFrame, GeometryError> {
    let prep = prepare(scene, pointer, cone_radius)?;
    let selected: Vec<usize> = prep
        .in_cone(cone_radius)
        .into_iter()
        .filter(|&i| scene.targets()[i].selectable)
        .collect();
    let targets: Vec<TargetContext> = selected
        .par_iter()
        .map(|&i| {
            let raw = prep.outlines[i]
                .as_ref()
                .expect("candidate outlines are projected");
            let coned = clip_convex_to_disk(raw, cone_radius);
            let outline = if coned.has_area() {
                let occluders: Vec<&Polygon2D> = prep
                    .occluders(i)
                    .into_iter()
                    .filter(|o| convex_may_overlap(&coned.vertices, &o.vertices))
                    .collect();
                polygon_difference(&coned, &occluders)
            } else {
                Polygon2D::empty()
            };
            let centroid = centroid(&outline).ok();
            let outline = if centroid.is_some() {
                outline
            } else {
                Polygon2D::empty()
            };
            let cone = prep.cones[i];
            let center_2d = project_local(&cone.local).ok();
            let angular_distance = centroid
                .or(center_2d)
                .map_or(f64::INFINITY, AngularPoint::norm);
            TargetContext {
                id: scene.targets()[i].id,
                scene_index: i,
                outline,
                raw_area: raw.area(),
                centroid,
                center_2d,
                position_3d: cone.local,
                distance: cone.distance,
                angular_distance,
                bounding_radius: prep.radii[i],
            }
        })
        .collect();
    Ok(ContextFrame {
        targets,
        posture: estimate_posture(pointer, arm),
        pointer: pointer.clone(),
        frame: prep.frame,
        cone_radius,
    })
}
