//! Scene documents: the JSON form of a set of targets.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::sync::{Arc, OnceLock};

use crate::geometry::{voronoi_cells_3d, AaBox, Polyhedron3D, Primitive, Shape, Vec3};

pub const SCENE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetId(pub u32);

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub id: TargetId,
    pub shape: Shape,
    /// World position, meters.
    pub position: [f64; 3],
    /// `[x, y, z, w]`.
    pub rotation_quaternion: [f64; 4],
    pub scale: [f64; 3],
    #[serde(default = "default_true")]
    pub selectable: bool,
}

fn default_true() -> bool {
    true
}

impl Target {
    pub fn primitive(&self) -> Primitive {
        let [x, y, z, w] = self.rotation_quaternion;
        Primitive {
            shape: self.shape,
            position: Vec3::from(self.position),
            rotation: UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)),
            scale: Vec3::from(self.scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDocument {
    version: u32,
    targets: Vec<Target>,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document invalid at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate target id {0}")]
    DuplicateId(TargetId),
    #[error("target {id}: {message}")]
    InvalidTarget { id: TargetId, message: String },
    #[error("unsupported scene version {0}")]
    Version(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Validated, immutable set of targets.
#[derive(Debug, Clone)]
pub struct Scene {
    targets: Vec<Target>,
    primitives: Vec<Primitive>,
    radii: Vec<f64>,
    cursor_cells: OnceLock<(u64, Arc<Vec<Polyhedron3D>>)>,
}

impl PartialEq for Scene {
    fn eq(&self, other: &Self) -> bool {
        self.targets == other.targets
    }
}

impl Scene {
    pub fn new(targets: Vec<Target>) -> Result<Self, SceneError> {
        let mut seen = HashSet::new();
        for t in &targets {
            if !seen.insert(t.id) {
                return Err(SceneError::DuplicateId(t.id));
            }
            let invalid = |message: &str| SceneError::InvalidTarget {
                id: t.id,
                message: message.to_string(),
            };
            if !t.position.iter().all(|x| x.is_finite()) {
                return Err(invalid("position must be finite"));
            }
            if !t.scale.iter().all(|s| s.is_finite() && *s > 0.0) {
                return Err(invalid("scale components must be positive"));
            }
            let qn: f64 = t
                .rotation_quaternion
                .iter()
                .map(|q| q * q)
                .sum::<f64>()
                .sqrt();
            if !(qn.is_finite() && qn > 1e-9) {
                return Err(invalid("rotation quaternion must be non-zero"));
            }
        }
        let primitives: Vec<Primitive> = targets.iter().map(Target::primitive).collect();
        let radii = primitives.iter().map(Primitive::bounding_radius).collect();
        Ok(Self {
            targets,
            primitives,
            radii,
            cursor_cells: OnceLock::new(),
        })
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    /// Bounding radius of each primitive, in target order.
    pub fn bounding_radii(&self) -> &[f64] {
        &self.radii
    }

    /// World box around every target's bounding sphere, grown by `margin`.
    pub fn content_box(&self, margin: f64) -> Option<AaBox> {
        let mut it = self
            .primitives
            .iter()
            .map(|p| (p.position, p.bounding_radius() + margin));
        let (p, r) = it.next()?;
        let mut b = AaBox {
            min: p.add_scalar(-r),
            max: p.add_scalar(r),
        };
        for (p, r) in it {
            b.min = b.min.inf(&p.add_scalar(-r));
            b.max = b.max.sup(&p.add_scalar(r));
        }
        Some(b)
    }

    /// World-space Voronoi cells of the selectable target centers inside
    /// [`Scene::content_box`], indexed like [`Scene::targets`]. Cells of
    /// non-selectable targets are empty. Cached for the first margin asked.
    pub fn cursor_cells(&self, margin: f64) -> Arc<Vec<Polyhedron3D>> {
        let build = || {
            let Some(bounds) = self.content_box(margin) else {
                return Arc::new(Vec::new());
            };
            let sites: Vec<Vec3> = self
                .targets
                .iter()
                .filter(|t| t.selectable)
                .map(|t| Vec3::from(t.position))
                .collect();
            let mut cells = voronoi_cells_3d(&sites, &bounds).into_iter();
            let all = self
                .targets
                .iter()
                .map(|t| {
                    if t.selectable {
                        cells.next().and_then(Result::ok).unwrap_or_default()
                    } else {
                        Polyhedron3D::default()
                    }
                })
                .collect();
            Arc::new(all)
        };
        let (key, cells) = self
            .cursor_cells
            .get_or_init(|| (margin.to_bits(), build()));
        if *key == margin.to_bits() {
            cells.clone()
        } else {
            build()
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn index_of(&self, id: TargetId) -> Option<usize> {
        self.targets.iter().position(|t| t.id == id)
    }

    pub fn get(&self, id: TargetId) -> Option<&Target> {
        self.index_of(id).map(|i| &self.targets[i])
    }

    /// Parses and validates a scene document.
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: SceneDocument =
            serde_path_to_error::deserialize(de).map_err(|e| SceneError::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        if doc.version != SCENE_VERSION {
            return Err(SceneError::Version(doc.version));
        }
        Self::new(doc.targets)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDocument {
            version: SCENE_VERSION,
            targets: self.targets.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SceneError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), SceneError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Parses a scene document (see [`Scene::from_json`]).
pub fn load_scene(document: &str) -> Result<Scene, SceneError> {
    Scene::from_json(document)
}
