//! Angular control space: azimuth/elevation of directions relative to the
//! controller's pointing axis, in degrees.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::GeometryError;

pub type Vec3 = Vector3<f64>;

/// World up axis. Scenes are y-up.
pub const WORLD_UP: Vec3 = Vector3::new(0.0, 1.0, 0.0);
const WORLD_Z: Vec3 = Vector3::new(0.0, 0.0, 1.0);

/// A point of the 2D control space: `h` is azimuth toward the frame's right
/// axis, `v` is elevation toward its up axis, both signed degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngularPoint {
    pub h: f64,
    pub v: f64,
}

impl AngularPoint {
    pub const ORIGIN: Self = Self { h: 0.0, v: 0.0 };

    pub fn new(h: f64, v: f64) -> Self {
        Self { h, v }
    }

    /// Distance from the pointing axis in the control space.
    pub fn norm(self) -> f64 {
        (self.h * self.h + self.v * self.v).sqrt()
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.h * other.h + self.v * other.v
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.h * other.v - self.v * other.h
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.h * k, self.v * k)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.v, self.h)
    }

    pub fn is_finite(self) -> bool {
        self.h.is_finite() && self.v.is_finite()
    }
}

impl std::ops::Add for AngularPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.h + o.h, self.v + o.v)
    }
}

impl std::ops::Sub for AngularPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.h - o.h, self.v - o.v)
    }
}

/// Orthonormal controller frame. `right = up × forward`, so with a y-up world
/// and forward +z the right axis is +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerFrame {
    pub position: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    pub right: Vec3,
}

impl ControllerFrame {
    /// Builds the frame from a position and a pointing direction. The up axis
    /// is world-up projected onto the plane perpendicular to `forward`; within
    /// 1° of world-up, world-z is used instead.
    pub fn new(position: Vec3, forward: Vec3) -> Result<Self, GeometryError> {
        let len = forward.norm();
        if !(len.is_finite() && len > 1e-12) {
            return Err(GeometryError::Degenerate);
        }
        let forward = forward / len;
        let reference = if forward.dot(&WORLD_UP).abs() > 1f64.to_radians().cos() {
            WORLD_Z
        } else {
            WORLD_UP
        };
        let up = (reference - forward * forward.dot(&reference)).normalize();
        let right = up.cross(&forward);
        Ok(Self {
            position,
            forward,
            up,
            right,
        })
    }

    /// Expresses a world point in frame coordinates `(right, up, forward)`.
    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        let d = world - self.position;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.position + self.right * local.x + self.up * local.y + self.forward * local.z
    }

    /// Projects a world point into the control space.
    pub fn project(&self, world: &Vec3) -> Result<AngularPoint, GeometryError> {
        project_local(&self.to_local(world))
    }

    /// World-space unit direction for a control-space point.
    pub fn direction(&self, p: AngularPoint) -> Vec3 {
        let local = local_direction(p);
        self.right * local.x + self.up * local.y + self.forward * local.z
    }
}

/// Projects a point already expressed in frame coordinates `(right, up, forward)`.
pub fn project_local(local: &Vec3) -> Result<AngularPoint, GeometryError> {
    let (r, u, f) = (local.x, local.y, local.z);
    if !(r.is_finite() && u.is_finite() && f.is_finite()) || local.norm() < 1e-12 {
        return Err(GeometryError::Degenerate);
    }
    if f <= 0.0 {
        return Err(GeometryError::Behind);
    }
    Ok(AngularPoint::new(
        r.atan2(f).to_degrees(),
        u.atan2((f * f + r * r).sqrt()).to_degrees(),
    ))
}

/// Unit direction in frame coordinates for a control-space point.
pub fn local_direction(p: AngularPoint) -> Vec3 {
    let (h, v) = (p.h.to_radians(), p.v.to_radians());
    Vec3::new(v.cos() * h.sin(), v.sin(), v.cos() * h.cos())
}

/// Azimuth/elevation of `world_point` as seen along the controller's pointing axis.
pub fn project_point(
    frame: &ControllerFrame,
    world_point: &Vec3,
) -> Result<AngularPoint, GeometryError> {
    frame.project(world_point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> ControllerFrame {
        ControllerFrame::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0)).unwrap()
    }

    #[test]
    fn on_axis_projects_to_origin() {
        let p = frame().project(&Vec3::new(0.0, 0.0, 3.0)).unwrap();
        assert_eq!(p, AngularPoint::ORIGIN);
    }

    #[test]
    fn forty_five_degrees_right() {
        let f = frame();
        let p = f.project(&(f.forward + f.right)).unwrap();
        assert!((p.h - 45.0).abs() < 1e-9 && p.v.abs() < 1e-9);
    }

    #[test]
    fn spherical_round_trip() {
        // independent conversion: elevation measured from the horizontal plane
        let (h, v) = (10f64.to_radians(), 5f64.to_radians());
        let dir = Vec3::new(v.cos() * h.sin(), v.sin(), v.cos() * h.cos());
        let p = frame().project(&(dir * 2.5)).unwrap();
        assert!((p.h - 10.0).abs() < 1e-6 && (p.v - 5.0).abs() < 1e-6);
    }

    #[test]
    fn behind_and_degenerate_are_distinct() {
        let f = frame();
        assert_eq!(
            f.project(&Vec3::new(0.0, 0.0, -1.0)),
            Err(GeometryError::Behind)
        );
        assert_eq!(
            f.project(&Vec3::new(1.0, 0.0, 0.0)),
            Err(GeometryError::Behind)
        );
        assert_eq!(f.project(&Vec3::zeros()), Err(GeometryError::Degenerate));
        assert!(ControllerFrame::new(Vec3::zeros(), Vec3::zeros()).is_err());
    }

    #[test]
    fn vertical_forward_uses_world_z() {
        let f = ControllerFrame::new(Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!((f.up - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!(f.right.dot(&f.forward).abs() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_for_tilted_forward() {
        let f = ControllerFrame::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.3, -0.4, 0.8)).unwrap();
        assert!((f.forward.norm() - 1.0).abs() < 1e-12);
        assert!(f.up.dot(&f.forward).abs() < 1e-12);
        assert!(f.right.dot(&f.up).abs() < 1e-12);
        assert!(f.up.y > 0.0);
    }
}
