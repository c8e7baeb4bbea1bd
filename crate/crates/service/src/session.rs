use std::collections::BTreeMap;
use std::sync::Arc;

use adaptsel_core::adapter::{step, technique_regions, AdapterState, FrameDecision};
use adaptsel_core::config::AdapterConfig;
use adaptsel_core::scene::{extract_context, PointerState, Scene};
use adaptsel_core::simulator::{generate_environment, EnvKind, EnvironmentSpec};
use adaptsel_core::techniques::{highlight, Technique, TechniqueState};
use adaptsel_core::trace::{Trace, TraceFrame, TraceHeader};

use crate::protocol::*;

/// Named scenes a session may load. Shared read-only.
#[derive(Debug, Clone, Default)]
pub struct SceneCatalog {
    scenes: BTreeMap<String, Arc<Scene>>,
}

impl SceneCatalog {
    /// One generated scene per study environment, seed 1, 2.5° target.
    pub fn bundled() -> Self {
        let mut catalog = Self::default();
        for kind in EnvKind::ALL {
            let env = generate_environment(&EnvironmentSpec::new(kind, 2.5, 1))
                .expect("study environments generate");
            catalog.insert(kind.name(), env.scene);
        }
        catalog
    }

    pub fn insert(&mut self, name: &str, scene: Scene) {
        self.scenes.insert(name.to_string(), Arc::new(scene));
    }

    pub fn get(&self, name: &str) -> Option<Arc<Scene>> {
        self.scenes.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, usize)> {
        self.scenes.iter().map(|(k, s)| (k.as_str(), s.len()))
    }
}

/// One client's engine state. Messages are applied strictly in order.
pub struct Session {
    pub id: u64,
    scene_name: String,
    scene: Arc<Scene>,
    config: AdapterConfig,
    adapter: AdapterState,
    technique: TechniqueState,
    trace: Option<Trace>,
}

impl Session {
    pub fn new(
        id: u64,
        scene_name: &str,
        scene: Arc<Scene>,
        config: AdapterConfig,
        record: bool,
    ) -> Self {
        let mut s = Self {
            id,
            scene_name: scene_name.to_string(),
            adapter: AdapterState::new(&config),
            technique: TechniqueState::new(config.initial_technique),
            scene,
            config,
            trace: None,
        };
        if record {
            s.trace = Some(s.fresh_trace());
        }
        s.reset();
        s
    }

    fn fresh_trace(&self) -> Trace {
        Trace::new(TraceHeader::new(&self.config, &self.scene))
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            session_id: self.id,
            scene: self.scene_name.clone(),
            targets: self.scene.len(),
            preset: self.config.preset.clone(),
            config_hash: self.config.hash(),
            techniques: self.config.techniques.clone(),
            weights: self.config.weights,
            technique: self.technique.kind,
            color: technique_color(self.technique.kind).to_string(),
        }
    }

    pub fn config(&self) -> &AdapterConfig {
        &self.config
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    /// Back to the state of a freshly opened session on the same scene and
    /// config. A recorded trace restarts.
    pub fn reset(&mut self) {
        self.adapter = AdapterState::new(&self.config);
        self.technique = TechniqueState::new(self.config.initial_technique);
        self.technique.transfer = self.config.transfer;
        if self.trace.is_some() {
            self.trace = Some(self.fresh_trace());
        }
    }

    /// Parses and applies one text message, returning the reply.
    pub fn handle_text(&mut self, text: &str, catalog: &SceneCatalog) -> ServerMessage {
        let message: ClientMessage = match serde_json::from_str(text) {
            Ok(m) => m,
            Err(e) => return error(format!("malformed message: {e}")),
        };
        if message.v != PROTOCOL_VERSION {
            return error(format!(
                "unsupported protocol version {} (expected {PROTOCOL_VERSION})",
                message.v
            ));
        }
        self.handle(message.body, catalog)
    }

    pub fn handle(&mut self, body: ClientBody, catalog: &SceneCatalog) -> ServerMessage {
        match body {
            ClientBody::PointerUpdate { pointer } => match self.pointer_update(&pointer) {
                Ok(frame) => ServerBody::Frame(Box::new(frame)).into(),
                Err(e) => error(e),
            },
            ClientBody::SetPreset { preset } => match AdapterConfig::preset(&preset) {
                Ok(config) => {
                    self.config = config;
                    self.reset();
                    ServerBody::Session(self.info()).into()
                }
                Err(e) => error(e.to_string()),
            },
            ClientBody::SetWeights { weights } => {
                if let Err(e) = weights.validate() {
                    return error(e);
                }
                self.config.weights = weights;
                self.config.preset = None;
                if self.trace.is_some() {
                    self.trace = Some(self.fresh_trace());
                }
                ServerBody::Session(self.info()).into()
            }
            ClientBody::LoadScene { name, scene } => {
                let loaded = match (name, scene) {
                    (Some(n), None) => catalog
                        .get(&n)
                        .map(|s| (n.clone(), s))
                        .ok_or_else(|| format!("no bundled scene `{n}`")),
                    (None, Some(doc)) => Scene::from_json(&doc.to_string())
                        .map(|s| ("inline".to_string(), Arc::new(s)))
                        .map_err(|e| e.to_string()),
                    _ => Err("load_scene needs exactly one of `name` or `scene`".into()),
                };
                match loaded {
                    Ok((n, s)) => {
                        self.scene_name = n;
                        self.scene = s;
                        self.reset();
                        ServerBody::Session(self.info()).into()
                    }
                    Err(e) => error(e),
                }
            }
            ClientBody::Reset => {
                self.reset();
                ServerBody::Session(self.info()).into()
            }
        }
    }

    /// Runs the full per-frame pipeline for one pointer sample.
    pub fn pointer_update(&mut self, pointer: &PointerState) -> Result<FrameBroadcast, String> {
        let ctx = extract_context(
            &self.scene,
            pointer,
            &self.config.arm,
            self.config.cone_radius,
        )
        .map_err(|e| format!("pointer rejected: {e}"))?;
        let regions = technique_regions(&self.scene, &ctx, &self.config);
        let verbose = self.trace.as_ref().is_some_and(|t| t.header.verbose);
        let decision = step(&ctx, &regions, &self.config, &mut self.adapter, verbose);
        if let Some(t) = decision.new_technique {
            self.technique.switch_to(t);
        }
        if let Some(trace) = &mut self.trace {
            trace
                .frames
                .push(TraceFrame::new(pointer, &decision, verbose));
        }
        let lit = highlight(&mut self.technique, &ctx, pointer);
        let kind = self.technique.kind;
        let bent_ray_end = match kind {
            Technique::StickyRay => lit.and_then(|id| ctx.target(id)).and_then(|t| t.centroid),
            _ => None,
        };
        Ok(FrameBroadcast {
            frame: decision.frame,
            t: pointer.timestamp,
            technique: kind,
            color: technique_color(kind).to_string(),
            optimal: decision.optimal,
            margin: decision.margin,
            switched: decision.switched,
            new_technique: decision.new_technique,
            idle: decision.idle,
            scores: summaries(&decision),
            highlight: lit,
            outlines: ctx
                .targets
                .iter()
                .map(|t| OutlineGeometry {
                    id: t.id,
                    outline: t.outline.clone(),
                })
                .collect(),
            regions: regions
                .get(&kind)
                .map(|rs| {
                    rs.iter()
                        .map(|r| RegionGeometry {
                            id: r.target_id,
                            region: r.region.clone(),
                            selectable: r.selectable,
                            aim_center: r.aim_center,
                        })
                        .collect()
                })
                .unwrap_or_default(),
            bent_ray_end,
            cursor_depth: (kind == Technique::RayCursor).then_some(self.technique.cursor_depth),
        })
    }
}

fn summaries(decision: &FrameDecision) -> Vec<ScoreSummary> {
    decision
        .scores
        .iter()
        .map(|s| ScoreSummary {
            technique: s.technique,
            overall: s.overall,
            speed: s.smoothed.speed,
            accuracy: s.smoothed.accuracy,
            comfort: s.smoothed.comfort,
            familiarity: s.smoothed.familiarity,
        })
        .collect()
}

fn error(message: impl Into<String>) -> ServerMessage {
    ServerBody::Error {
        message: message.into(),
    }
    .into()
}
