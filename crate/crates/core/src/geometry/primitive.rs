//! Target primitives and their tessellated silhouettes.
//!
//! Unit shapes fit the cube `[-0.5, 0.5]³` before scaling: sphere of
//! diameter 1, unit cube, cylinder of diameter 1 and height 1 along local y,
//! capsule of diameter 0.5 and total height 1 along local y.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

use super::{convex_hull, AngularPoint, ControllerFrame, Polygon2D, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Box,
    Cylinder,
    Capsule,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Sphere, Shape::Box, Shape::Cylinder, Shape::Capsule];
}

/// Shape with a world pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub position: Vec3,
    pub rotation: UnitQuaternion<f64>,
    pub scale: Vec3,
}

/// Default tessellation: 162-vertex icosphere, 32-gon rings.
pub const DEFAULT_LEVEL: u32 = 2;

const RING_SEGMENTS: usize = 32;

static DEFAULT_MESHES: LazyLock<[Vec<Vec3>; 4]> =
    LazyLock::new(|| Shape::ALL.map(|s| build_mesh(s, DEFAULT_LEVEL)));

/// Unit-shape vertices at the given level. Level 2 is the default; for
/// spheres it is the icosphere subdivision count, for round shapes it scales
/// the ring segment count as `32·2^(level-2)`.
pub fn tessellate(shape: Shape, level: u32) -> std::borrow::Cow<'static, [Vec3]> {
    if level == DEFAULT_LEVEL {
        let idx = Shape::ALL.iter().position(|s| *s == shape).unwrap_or(0);
        std::borrow::Cow::Borrowed(&DEFAULT_MESHES[idx])
    } else {
        std::borrow::Cow::Owned(build_mesh(shape, level))
    }
}

fn ring_segments(level: u32) -> usize {
    if level >= DEFAULT_LEVEL {
        RING_SEGMENTS << (level - DEFAULT_LEVEL).min(6)
    } else {
        (RING_SEGMENTS >> (DEFAULT_LEVEL - level)).max(8)
    }
}

fn build_mesh(shape: Shape, level: u32) -> Vec<Vec3> {
    match shape {
        Shape::Sphere => icosphere(level).into_iter().map(|v| v * 0.5).collect(),
        Shape::Box => {
            let mut v = Vec::with_capacity(8);
            for &x in &[-0.5, 0.5] {
                for &y in &[-0.5, 0.5] {
                    for &z in &[-0.5, 0.5] {
                        v.push(Vec3::new(x, y, z));
                    }
                }
            }
            v
        }
        Shape::Cylinder => {
            let n = ring_segments(level);
            let mut v = ring(n, 0.5, -0.5);
            v.extend(ring(n, 0.5, 0.5));
            v
        }
        Shape::Capsule => {
            let n = ring_segments(level);
            let r = 0.25;
            let half = 0.25; // half-length of the straight section
            let mut v = Vec::new();
            for k in 0..4 {
                let lat = (k as f64) * std::f64::consts::FRAC_PI_8;
                v.extend(ring(n, r * lat.cos(), half + r * lat.sin()));
                v.extend(ring(n, r * lat.cos(), -half - r * lat.sin()));
            }
            v.push(Vec3::new(0.0, half + r, 0.0));
            v.push(Vec3::new(0.0, -half - r, 0.0));
            v
        }
    }
}

fn ring(n: usize, radius: f64, y: f64) -> Vec<Vec3> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            Vec3::new(radius * a.cos(), y, radius * a.sin())
        })
        .collect()
}

/// Unit-radius icosphere with `subdivisions` rounds of edge splitting
/// (12, 42, 162, 642, ... vertices).
pub fn icosphere(subdivisions: u32) -> Vec<Vec3> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mids = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

impl Primitive {
    pub fn world_vertices(&self, level: u32) -> Vec<Vec3> {
        tessellate(self.shape, level)
            .iter()
            .map(|v| self.position + self.rotation * v.component_mul(&self.scale))
            .collect()
    }

    /// Radius of the smallest origin-centred sphere holding the scaled shape.
    pub fn bounding_radius(&self) -> f64 {
        tessellate(self.shape, DEFAULT_LEVEL)
            .iter()
            .map(|v| v.component_mul(&self.scale).norm())
            .fold(0.0, f64::max)
    }
}

/// Outline of a primitive in the control space: hull of its projected
/// tessellation. Vertices behind the controller are culled; empty when none
/// remain.
pub fn project_primitive(
    primitive: &Primitive,
    frame: &ControllerFrame,
    tessellation_level: u32,
) -> Polygon2D {
    let pts: Vec<AngularPoint> = tessellate(primitive.shape, tessellation_level)
        .iter()
        .map(|v| primitive.position + primitive.rotation * v.component_mul(&primitive.scale))
        .filter_map(|v| frame.project(&v).ok())
        .collect();
    convex_hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_at(z: f64, diameter: f64) -> Primitive {
        Primitive {
            shape: Shape::Sphere,
            position: Vec3::new(0.0, 0.0, z),
            rotation: UnitQuaternion::identity(),
            scale: Vec3::repeat(diameter),
        }
    }

    fn frame() -> ControllerFrame {
        ControllerFrame::new(Vec3::zeros(), Vec3::z()).unwrap()
    }

    #[test]
    fn icosphere_counts() {
        assert_eq!(icosphere(0).len(), 12);
        assert_eq!(icosphere(1).len(), 42);
        assert_eq!(icosphere(2).len(), 162);
    }

    #[test]
    fn sphere_silhouette_area() {
        let outline = project_primitive(&sphere_at(2.0, 0.2), &frame(), DEFAULT_LEVEL);
        let r = (0.1f64 / 2.0).atan().to_degrees();
        let expected = std::f64::consts::PI * r * r;
        assert!(
            (outline.area() - expected).abs() / expected < 0.02,
            "{} vs {}",
            outline.area(),
            expected
        );
    }

    #[test]
    fn cube_face_on_is_square() {
        let cube = Primitive {
            shape: Shape::Box,
            ..sphere_at(3.0, 0.5)
        };
        let outline = project_primitive(&cube, &frame(), DEFAULT_LEVEL);
        // near face is inside the far face's outline
        assert_eq!(outline.vertices.len(), 4);
    }

    #[test]
    fn behind_is_empty() {
        assert!(project_primitive(&sphere_at(-2.0, 0.2), &frame(), DEFAULT_LEVEL).is_empty());
    }

    #[test]
    fn bounding_radii() {
        assert!((sphere_at(0.0, 0.4).bounding_radius() - 0.2).abs() < 1e-12);
        let cube = Primitive {
            shape: Shape::Box,
            ..sphere_at(0.0, 1.0)
        };
        assert!((cube.bounding_radius() - 0.75f64.sqrt()).abs() < 1e-12);
        let cap = Primitive {
            shape: Shape::Capsule,
            ..sphere_at(0.0, 1.0)
        };
        assert!((cap.bounding_radius() - 0.5).abs() < 1e-12);
    }
}
