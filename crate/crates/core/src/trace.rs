//! JSON-lines decision traces and their replay.
//!
//! The first line is a header carrying everything needed to recompute the
//! stream (config, scene, initial technique); every following line is one
//! frame: the pointer sample that was fed in and the decision that came out.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::adapter::{step, technique_regions, AdapterState, FrameDecision, TargetScore};
use crate::config::AdapterConfig;
use crate::scene::{extract_context, PointerState, Scene, TargetId};
use crate::techniques::Technique;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub v: u32,
    pub config_hash: String,
    pub config: AdapterConfig,
    /// Scene document, inline.
    pub scene: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub verbose: bool,
}

impl TraceHeader {
    pub fn new(config: &AdapterConfig, scene: &Scene) -> Self {
        Self {
            v: TRACE_VERSION,
            config_hash: config.hash(),
            config: config.clone(),
            scene: serde_json::from_str(&scene.to_json()).expect("scene document is JSON"),
            target: None,
            label: None,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechniqueRecord {
    pub overall: f64,
    #[serde(rename = "S_S")]
    pub speed: f64,
    #[serde(rename = "S_A")]
    pub accuracy: f64,
    #[serde(rename = "S_C")]
    pub comfort: f64,
    #[serde(rename = "S_F")]
    pub familiarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub frame: u64,
    pub t: f64,
    pub pointer: PointerState,
    pub techniques: BTreeMap<Technique, TechniqueRecord>,
    pub optimal: Technique,
    pub margin: f64,
    pub current: Technique,
    pub switched: bool,
    #[serde(default)]
    pub idle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<BTreeMap<Technique, Vec<TargetScore>>>,
}

impl TraceFrame {
    pub fn new(pointer: &PointerState, decision: &FrameDecision, verbose: bool) -> Self {
        Self {
            frame: decision.frame,
            t: pointer.timestamp,
            pointer: pointer.clone(),
            techniques: decision
                .scores
                .iter()
                .map(|s| {
                    (
                        s.technique,
                        TechniqueRecord {
                            overall: s.overall,
                            speed: s.smoothed.speed,
                            accuracy: s.smoothed.accuracy,
                            comfort: s.smoothed.comfort,
                            familiarity: s.smoothed.familiarity,
                        },
                    )
                })
                .collect(),
            optimal: decision.optimal,
            margin: decision.margin,
            current: decision.current,
            switched: decision.switched,
            idle: decision.idle,
            targets: verbose.then(|| decision.breakdown.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine {
    Header(TraceHeader),
    Frame(TraceFrame),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub frames: Vec<TraceFrame>,
}

impl Trace {
    pub fn new(header: TraceHeader) -> Self {
        Self {
            header,
            frames: Vec::new(),
        }
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &TraceLine::Header(self.header.clone()))?;
        out.write_all(b"\n")?;
        for f in &self.frames {
            serde_json::to_writer(&mut out, &TraceLine::Frame(f.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no header")]
    MissingHeader,
    #[error("unsupported trace version {0}")]
    Version(u32),
    #[error(
        "config mismatch: trace was recorded with config {recorded}, replaying with {current}"
    )]
    ConfigMismatch { recorded: String, current: String },
    #[error("trace config invalid: {0}")]
    InvalidConfig(String),
    #[error("trace scene invalid: {0}")]
    Scene(String),
    #[error("frame {frame}: pointer sample rejected: {message}")]
    Pointer { frame: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw lines of a trace, each kept as a JSON value so replay can compare
/// exactly what was written.
pub struct RawTrace {
    pub header: TraceHeader,
    pub frames: Vec<(usize, Value)>,
}

pub fn read_raw(reader: impl BufRead) -> Result<RawTrace, TraceError> {
    let mut header = None;
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| TraceError::Parse {
            line: i + 1,
            message: e.to_string(),
        };
        let value: Value = serde_json::from_str(&line).map_err(parse_err)?;
        match value.get("type").and_then(Value::as_str) {
            Some("header") if header.is_none() => {
                let TraceLine::Header(h) = serde_json::from_value(value).map_err(parse_err)? else {
                    unreachable!()
                };
                header = Some(h);
            }
            Some("frame") if header.is_some() => frames.push((i + 1, value)),
            other => {
                return Err(TraceError::Parse {
                    line: i + 1,
                    message: format!("unexpected record type {other:?}"),
                })
            }
        }
    }
    let header = header.ok_or(TraceError::MissingHeader)?;
    if header.v != TRACE_VERSION {
        return Err(TraceError::Version(header.v));
    }
    Ok(RawTrace { header, frames })
}

pub fn read_trace(reader: impl BufRead) -> Result<Trace, TraceError> {
    let raw = read_raw(reader)?;
    let frames = raw
        .frames
        .into_iter()
        .map(|(line, v)| match serde_json::from_value(v) {
            Ok(TraceLine::Frame(f)) => Ok(f),
            Ok(TraceLine::Header(_)) => Err(TraceError::Parse {
                line,
                message: "duplicate header".into(),
            }),
            Err(e) => Err(TraceError::Parse {
                line,
                message: e.to_string(),
            }),
        })
        .collect::<Result<_, _>>()?;
    Ok(Trace {
        header: raw.header,
        frames,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub frame: u64,
    pub line: usize,
    /// JSON pointer of the first differing field.
    pub field: String,
    pub recorded: Value,
    pub replayed: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Identical { frames: usize, switches: usize },
    Diverged(Divergence),
}

fn first_difference(path: &str, a: &Value, b: &Value) -> Option<(String, Value, Value)> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            keys.into_iter().find_map(|k| {
                let p = format!("{path}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => first_difference(&p, u, v),
                    (u, v) => Some((
                        p,
                        u.cloned().unwrap_or(Value::Null),
                        v.cloned().unwrap_or(Value::Null),
                    )),
                }
            })
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .find_map(|(i, (u, v))| first_difference(&format!("{path}/{i}"), u, v)),
        _ if a == b => None,
        _ => Some((path.to_string(), a.clone(), b.clone())),
    }
}

/// Re-runs the adapter over the recorded pointer samples and compares each
/// frame with what was recorded. `config` overrides the recorded config and
/// must hash identically.
pub fn replay(raw: &RawTrace, config: Option<&AdapterConfig>) -> Result<ReplayOutcome, TraceError> {
    let header = &raw.header;
    let recorded_hash = header.config.hash();
    if recorded_hash != header.config_hash {
        return Err(TraceError::ConfigMismatch {
            recorded: header.config_hash.clone(),
            current: recorded_hash,
        });
    }
    if let Some(c) = config {
        if c.hash() != header.config_hash {
            return Err(TraceError::ConfigMismatch {
                recorded: header.config_hash.clone(),
                current: c.hash(),
            });
        }
    }
    let config = &header.config;
    config.validate().map_err(TraceError::InvalidConfig)?;
    let scene = Scene::from_json(&header.scene.to_string())
        .map_err(|e| TraceError::Scene(e.to_string()))?;
    let mut state = AdapterState::new(config);
    let mut switches = 0;
    for (line, recorded) in &raw.frames {
        let frame_no = recorded
            .get("frame")
            .and_then(Value::as_u64)
            .unwrap_or(state.frame);
        let pointer: PointerState = recorded
            .get("pointer")
            .cloned()
            .ok_or_else(|| TraceError::Parse {
                line: *line,
                message: "frame without pointer".into(),
            })
            .and_then(|p| {
                serde_json::from_value(p).map_err(|e| TraceError::Parse {
                    line: *line,
                    message: e.to_string(),
                })
            })?;
        let ctx =
            extract_context(&scene, &pointer, &config.arm, config.cone_radius).map_err(|e| {
                TraceError::Pointer {
                    frame: frame_no,
                    message: e.to_string(),
                }
            })?;
        let regions = technique_regions(&scene, &ctx, config);
        let decision = step(&ctx, &regions, config, &mut state, header.verbose);
        switches += usize::from(decision.switched);
        let replayed = serde_json::to_value(TraceLine::Frame(TraceFrame::new(
            &pointer,
            &decision,
            header.verbose,
        )))
        .expect("frame serializes");
        // Round-trip through text so both sides carry the same number representation.
        let replayed: Value = serde_json::from_str(&replayed.to_string()).expect("valid JSON");
        if let Some((field, rec, rep)) = first_difference("", recorded, &replayed) {
            return Ok(ReplayOutcome::Diverged(Divergence {
                frame: frame_no,
                line: *line,
                field,
                recorded: rec,
                replayed: rep,
            }));
        }
    }
    Ok(ReplayOutcome::Identical {
        frames: raw.frames.len(),
        switches,
    })
}
