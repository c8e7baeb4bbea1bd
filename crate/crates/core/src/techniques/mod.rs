//! Selection techniques: activation regions (`W`, `A` and the accuracy box
//! per target) and each technique's runtime highlight mechanism.

mod highlight;
mod regions;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{chord_through, AngularPoint, Polygon2D, EPS};
use crate::scene::TargetId;

pub use highlight::{highlight, ray_hit_depth, TechniqueState, TransferFunction, MIN_CURSOR_DEPTH};
pub use regions::{
    interaction_box, raycast_regions, raycursor_regions, regions_for, stickyray_regions,
    CursorSpace, RegionOptions, StickySites, CURSOR_NEAR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    RayCasting,
    StickyRay,
    RayCursor,
}

impl Technique {
    pub const ALL: [Technique; 3] = [
        Technique::RayCasting,
        Technique::StickyRay,
        Technique::RayCursor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::RayCasting => "RayCasting",
            Technique::StickyRay => "StickyRay",
            Technique::RayCursor => "RayCursor",
        }
    }

    /// Ray/controller color shown while the technique is active.
    pub fn color(self) -> &'static str {
        match self {
            Technique::RayCasting => "#f2f2f2",
            Technique::StickyRay => "#3fa7ff",
            Technique::RayCursor => "#ff9f1c",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raycasting" => Ok(Technique::RayCasting),
            "stickyray" => Ok(Technique::StickyRay),
            "raycursor" => Ok(Technique::RayCursor),
            _ => Err(format!("unknown technique `{s}`")),
        }
    }
}

/// Rectangle approximating a region in the movement frame at the aim center:
/// `x` along the pointing path, `y` to its left. `x1..x2` is the entry/exit
/// span and `y1` (upper) / `y2` (lower) the perpendicular crossings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyBox {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRegion {
    pub target_id: TargetId,
    pub region: Polygon2D,
    /// Effective width along the pointing path, degrees.
    pub width: f64,
    /// Amplitude from the pointing axis to the aim center, degrees.
    pub amplitude: f64,
    pub bbox: AccuracyBox,
    pub aim_center: AngularPoint,
    pub selectable: bool,
}

impl ActivationRegion {
    pub fn unselectable(target_id: TargetId) -> Self {
        Self {
            target_id,
            region: Polygon2D::empty(),
            width: 0.0,
            amplitude: 0.0,
            bbox: AccuracyBox::default(),
            aim_center: AngularPoint::ORIGIN,
            selectable: false,
        }
    }

    /// Unit movement direction: toward the aim center, or +h when the
    /// pointer already sits on it.
    pub fn movement_direction(&self) -> AngularPoint {
        movement_direction(self.aim_center)
    }

    /// Maps a control-space point into the movement frame `(x, y)` at the aim center.
    pub fn to_movement_frame(&self, p: AngularPoint) -> (f64, f64) {
        let u = self.movement_direction();
        let d = p - self.aim_center;
        (d.dot(u), d.dot(u.perp()))
    }
}

fn movement_direction(aim: AngularPoint) -> AngularPoint {
    let a = aim.norm();
    if a <= EPS {
        AngularPoint::new(1.0, 0.0)
    } else {
        aim.scale(1.0 / a)
    }
}

/// Measures `W`, `A` and the accuracy box of `region` about `aim_center`.
pub fn measure_region(
    target_id: TargetId,
    region: Polygon2D,
    aim_center: AngularPoint,
) -> ActivationRegion {
    if !region.has_area() {
        return ActivationRegion::unselectable(target_id);
    }
    let amplitude = aim_center.norm();
    let u = movement_direction(aim_center);
    let Some((t1, t2)) = chord_through(&region, AngularPoint::ORIGIN, u, amplitude) else {
        return ActivationRegion {
            aim_center,
            amplitude,
            ..ActivationRegion::unselectable(target_id)
        };
    };
    let (x1, x2) = (t1 - amplitude, t2 - amplitude);
    let (y2, y1) = chord_through(&region, aim_center, u.perp(), 0.0).unwrap_or((0.0, 0.0));
    let width = x2 - x1;
    ActivationRegion {
        target_id,
        region,
        width,
        amplitude,
        bbox: AccuracyBox { x1, x2, y1, y2 },
        aim_center,
        selectable: width > EPS,
    }
}
