//! Wire messages. Every message carries `v` and a snake_case `type`.

use adaptsel_core::config::Weights;
use adaptsel_core::geometry::{AngularPoint, Polygon2D};
use adaptsel_core::scene::{PointerState, TargetId};
use adaptsel_core::techniques::Technique;
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub v: u32,
    #[serde(flatten)]
    pub body: ClientBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientBody {
    PointerUpdate {
        #[serde(flatten)]
        pointer: PointerState,
    },
    SetPreset {
        preset: String,
    },
    SetWeights {
        weights: Weights,
    },
    /// A bundled scene by `name`, or an inline scene document.
    LoadScene {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        scene: Option<serde_json::Value>,
    },
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub v: u32,
    #[serde(flatten)]
    pub body: ServerBody,
}

impl From<ServerBody> for ServerMessage {
    fn from(body: ServerBody) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerBody {
    Session(SessionInfo),
    Frame(Box<FrameBroadcast>),
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: u64,
    pub scene: String,
    pub targets: usize,
    pub preset: Option<String>,
    pub config_hash: String,
    pub techniques: Vec<Technique>,
    pub weights: Weights,
    pub technique: Technique,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub technique: Technique,
    pub overall: f64,
    pub speed: f64,
    pub accuracy: f64,
    pub comfort: f64,
    pub familiarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineGeometry {
    pub id: TargetId,
    pub outline: Polygon2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGeometry {
    pub id: TargetId,
    pub region: Polygon2D,
    pub selectable: bool,
    pub aim_center: AngularPoint,
}

/// One decision plus everything needed to draw it, in control-space degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBroadcast {
    pub frame: u64,
    pub t: f64,
    pub technique: Technique,
    pub color: String,
    pub optimal: Technique,
    pub margin: f64,
    pub switched: bool,
    pub new_technique: Option<Technique>,
    pub idle: bool,
    pub scores: Vec<ScoreSummary>,
    pub highlight: Option<TargetId>,
    pub outlines: Vec<OutlineGeometry>,
    /// Regions of the active technique.
    pub regions: Vec<RegionGeometry>,
    /// Where the StickyRay secondary ray ends.
    pub bent_ray_end: Option<AngularPoint>,
    /// RayCursor depth along the ray, meters.
    pub cursor_depth: Option<f64>,
}

pub fn technique_color(t: Technique) -> &'static str {
    match t {
        Technique::RayCasting => "#3b82f6",
        Technique::StickyRay => "#f59e0b",
        Technique::RayCursor => "#10b981",
    }
}
