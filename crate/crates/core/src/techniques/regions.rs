use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{measure_region, ActivationRegion, Technique};
use crate::geometry::{
    centroid, clip_convex_to_disk, project_polyhedron, voronoi_cells_2d, voronoi_cells_3d, AaBox,
    AngularPoint, Plane, Polygon2D, Polyhedron3D, Vec3,
};
use crate::scene::{ContextFrame, Scene, TargetId};

/// Which point stands for a target when building StickyRay cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StickySites {
    /// Centroid of the occlusion-clipped outline.
    #[default]
    OutlineCentroid,
    /// Projection of the target's 3D center.
    ProjectedCenter,
}

/// The 3D space RayCursor cells are built in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CursorSpace {
    /// Controller-aligned box around the cone from `near` to the deepest
    /// in-cone center plus `far_margin`; sites are the in-cone targets.
    Cone { near: f64, far_margin: f64 },
    /// World box around all scene content grown by `margin`; sites are all
    /// selectable scene targets, so cells do not depend on the pointer.
    Scene { margin: f64 },
}

impl Default for CursorSpace {
    fn default() -> Self {
        CursorSpace::Scene { margin: 0.0 }
    }
}

/// Cells closer to the controller than this are cut off before projecting.
pub const CURSOR_NEAR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionOptions {
    #[serde(default)]
    pub sticky_sites: StickySites,
    #[serde(default)]
    pub cursor_space: CursorSpace,
    /// Clip projected RayCursor cells to the cone disk as the other
    /// techniques do.
    #[serde(default)]
    pub cursor_clip_to_cone: bool,
}

/// RayCasting: the clipped outline itself, aimed at its centroid. Fully
/// occluded targets are unselectable.
pub fn raycast_regions(ctx: &ContextFrame) -> Vec<ActivationRegion> {
    ctx.targets
        .iter()
        .map(|t| match t.centroid {
            Some(c) => measure_region(t.id, t.outline.clone(), c),
            None => ActivationRegion::unselectable(t.id),
        })
        .collect()
}

/// StickyRay: 2D Voronoi cells of the visible targets inside the cone disk,
/// aimed at each cell's centroid.
pub fn stickyray_regions(ctx: &ContextFrame, sites: StickySites) -> Vec<ActivationRegion> {
    let site_of = |t: &crate::scene::TargetContext| -> Option<AngularPoint> {
        t.centroid?;
        match sites {
            StickySites::OutlineCentroid => t.centroid,
            StickySites::ProjectedCenter => t.center_2d.or(t.centroid),
        }
    };
    let owners: Vec<(usize, AngularPoint)> = ctx
        .targets
        .iter()
        .enumerate()
        .filter_map(|(i, t)| site_of(t).map(|s| (i, s)))
        .collect();
    let points: Vec<AngularPoint> = owners.iter().map(|(_, s)| *s).collect();
    let cells = voronoi_cells_2d(&points, ctx.cone_radius);
    let mut cell_of: Vec<Option<Polygon2D>> = vec![None; ctx.targets.len()];
    for ((i, _), cell) in owners.iter().zip(cells) {
        cell_of[*i] = Some(cell);
    }
    ctx.targets
        .iter()
        .zip(cell_of)
        .map(|(t, cell)| match cell {
            Some(cell) => aimed_at_centroid(t.id, cell),
            None => ActivationRegion::unselectable(t.id),
        })
        .collect()
}

fn aimed_at_centroid(id: TargetId, region: Polygon2D) -> ActivationRegion {
    match centroid(&region) {
        Ok(c) => measure_region(id, region, c),
        Err(_) => ActivationRegion::unselectable(id),
    }
}

/// Interaction box in controller coordinates for the given sites.
pub fn interaction_box(sites: &[Vec3], cone_radius: f64, near: f64, far_margin: f64) -> AaBox {
    let deepest = sites.iter().map(|s| s.z).fold(near, f64::max);
    let far = deepest + far_margin;
    let half = far * cone_radius.to_radians().tan();
    let mut min = Vec3::new(-half, -half, near);
    let mut max = Vec3::new(half, half, far);
    for s in sites {
        for k in 0..3 {
            min[k] = min[k].min(s[k] - 1e-3);
            max[k] = max[k].max(s[k] + 1e-3);
        }
    }
    AaBox { min, max }
}

fn cursor_region(
    ctx: &ContextFrame,
    id: TargetId,
    cell: &Polyhedron3D,
    clip: bool,
) -> ActivationRegion {
    if cell.is_empty() {
        return ActivationRegion::unselectable(id);
    }
    let hull = project_polyhedron(cell, &ctx.frame);
    let region = if clip {
        clip_convex_to_disk(&hull, ctx.cone_radius)
    } else {
        hull
    };
    aimed_at_centroid(id, region)
}

/// RayCursor: 3D Voronoi cells of target centers projected to the control
/// space, occlusion ignored.
pub fn raycursor_regions(
    scene: &Scene,
    ctx: &ContextFrame,
    opts: &RegionOptions,
) -> Vec<ActivationRegion> {
    if ctx.targets.is_empty() {
        return Vec::new();
    }
    let clip = opts.cursor_clip_to_cone;
    match opts.cursor_space {
        CursorSpace::Cone { near, far_margin } => {
            let sites: Vec<Vec3> = ctx.targets.iter().map(|t| t.position_3d).collect();
            let bounds = interaction_box(&sites, ctx.cone_radius, near, far_margin);
            let cells = voronoi_cells_3d(&sites, &bounds);
            ctx.targets
                .par_iter()
                .zip(cells.into_par_iter())
                .map(|(t, cell)| match cell {
                    Ok(cell) => {
                        let world = cell.transformed(|v| ctx.frame.to_world(v));
                        cursor_region(ctx, t.id, &world, clip)
                    }
                    Err(_) => ActivationRegion::unselectable(t.id),
                })
                .collect()
        }
        CursorSpace::Scene { margin } => {
            let cells = scene.cursor_cells(margin);
            let near = Plane {
                normal: -ctx.frame.forward,
                offset: -(ctx.frame.forward.dot(&ctx.frame.position) + CURSOR_NEAR),
            };
            ctx.targets
                .par_iter()
                .map(|t| {
                    let mut cell = cells[t.scene_index].clone();
                    cell.clip(near);
                    cursor_region(ctx, t.id, &cell, clip)
                })
                .collect()
        }
    }
}

/// Regions of one technique over a context frame.
pub fn regions_for(
    technique: Technique,
    scene: &Scene,
    ctx: &ContextFrame,
    opts: &RegionOptions,
) -> Vec<ActivationRegion> {
    match technique {
        Technique::RayCasting => raycast_regions(ctx),
        Technique::StickyRay => stickyray_regions(ctx, opts.sticky_sites),
        Technique::RayCursor => raycursor_regions(scene, ctx, opts),
    }
}
