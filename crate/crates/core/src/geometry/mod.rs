//! Angular projection, polygon algebra and Voronoi constructions.
//!
//! All 2D quantities live in the control space (degrees); 3D quantities are
//! meters. Every function here is pure.

mod angular;
pub mod polygon;
pub mod polyhedron;
pub mod primitive;
mod voronoi;

use thiserror::Error;

pub use angular::{
    local_direction, project_local, project_point, AngularPoint, ControllerFrame, Vec3, WORLD_UP,
};
pub use polygon::{
    centroid, chord_through, clip_convex, clip_convex_to_disk, convex_hull, convex_may_overlap,
    disk_area, disk_polygon, line_region_intersections, polygon_difference, Bounds2, Polygon2D,
};
pub use polyhedron::{
    project_local_polyhedron, project_polyhedron, voronoi_cell_3d, voronoi_cells_3d, AaBox, Plane,
    Polyhedron3D,
};
pub use primitive::{project_primitive, Primitive, Shape};
pub use voronoi::voronoi_cells_2d;

/// Geometric tolerance in internal units.
pub const EPS: f64 = 1e-9;
/// Polygons below this area (deg²) count as empty.
pub const SLIVER_AREA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("point lies behind the controller")]
    Behind,
    #[error("degenerate direction")]
    Degenerate,
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("site lies outside the clip box")]
    SiteOutsideBox,
}
