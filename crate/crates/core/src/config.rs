//! Engine configuration and the two named presets.
//!
//! A config file is a JSON object that may name a `preset` and override any
//! field of it; nested objects merge key by key.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::objectives::{EdModelParams, FamiliarityTable, NormalizationBounds, Objective};
use crate::scene::ArmModel;
use crate::techniques::{RegionOptions, Technique, TransferFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub speed: f64,
    pub accuracy: f64,
    pub comfort: f64,
    pub familiarity: f64,
}

impl Weights {
    pub fn get(&self, o: Objective) -> f64 {
        match o {
            Objective::Speed => self.speed,
            Objective::Accuracy => self.accuracy,
            Objective::Comfort => self.comfort,
            Objective::Familiarity => self.familiarity,
        }
    }

    pub fn sum(&self) -> f64 {
        self.speed + self.accuracy + self.comfort + self.familiarity
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            speed: self.speed * k,
            accuracy: self.accuracy * k,
            comfort: self.comfort * k,
            familiarity: self.familiarity * k,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [self.speed, self.accuracy, self.comfort, self.familiarity];
        if !all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err("weights must be finite and non-negative".into());
        }
        if self.sum() <= 0.0 {
            return Err("weights must not all be zero".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    /// Preset this config was derived from, informational.
    #[serde(default)]
    pub preset: Option<String>,
    /// Candidate techniques in tie-break order.
    pub techniques: Vec<Technique>,
    pub initial_technique: Technique,
    pub weights: Weights,
    /// Interaction cone radius `r_c`, degrees.
    pub cone_radius: f64,
    /// Exponential smoothing factor in (0, 1].
    pub alpha: f64,
    /// Window length `w`, frames.
    pub window: usize,
    /// Frames `n` within the window a challenger must win.
    pub required: usize,
    /// Margin `t_o` a challenger must exceed.
    pub margin_threshold: f64,
    /// Comfort sweep increment `β`, degrees.
    pub beta: f64,
    pub familiarity: FamiliarityTable,
    /// Explicit bounds; derived from the other fields when absent.
    #[serde(default)]
    pub bounds: Option<NormalizationBounds>,
    #[serde(default)]
    pub ed_model: EdModelParams,
    #[serde(default)]
    pub arm: ArmModel,
    #[serde(default)]
    pub regions: RegionOptions,
    #[serde(default)]
    pub transfer: TransferFunction,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config invalid at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unknown preset `{0}` (expected `application` or `study`)")]
    UnknownPreset(String),
    #[error("config invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PRESET_NAMES: [&str; 2] = ["application", "study"];

impl AdapterConfig {
    /// All three techniques, balanced weights.
    pub fn application() -> Self {
        Self {
            preset: Some("application".into()),
            techniques: Technique::ALL.to_vec(),
            initial_technique: Technique::RayCasting,
            weights: Weights {
                speed: 0.5,
                accuracy: 0.2,
                comfort: 0.15,
                familiarity: 0.15,
            },
            cone_radius: 20.0,
            alpha: 0.8,
            window: 20,
            required: 15,
            margin_threshold: 0.0,
            beta: 1.0,
            familiarity: [
                (Technique::RayCasting, 0.57),
                (Technique::StickyRay, 0.33),
                (Technique::RayCursor, 0.1),
            ]
            .into_iter()
            .collect(),
            bounds: None,
            ed_model: EdModelParams::default(),
            arm: ArmModel::default(),
            regions: RegionOptions::default(),
            transfer: TransferFunction::default(),
        }
    }

    /// StickyRay and RayCursor only, performance-leaning weights.
    pub fn study() -> Self {
        Self {
            preset: Some("study".into()),
            techniques: vec![Technique::StickyRay, Technique::RayCursor],
            initial_technique: Technique::StickyRay,
            weights: Weights {
                speed: 0.5,
                accuracy: 0.2,
                comfort: 0.2,
                familiarity: 0.1,
            },
            familiarity: [(Technique::StickyRay, 0.7), (Technique::RayCursor, 0.3)]
                .into_iter()
                .collect(),
            ..Self::application()
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            "application" => Ok(Self::application()),
            "study" => Ok(Self::study()),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }

    /// Parses a config document: `{"preset": name?, ...overrides}`. Without a
    /// preset the document must be complete. `fallback_preset` applies when
    /// the document names none.
    pub fn from_json(text: &str, fallback_preset: Option<&str>) -> Result<Self, ConfigError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Schema {
            path: ".".into(),
            message: e.to_string(),
        })?;
        let Value::Object(ref map) = doc else {
            return Err(ConfigError::Schema {
                path: ".".into(),
                message: "expected a JSON object".into(),
            });
        };
        let preset = match map.get("preset") {
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Null) | None => fallback_preset.map(str::to_string),
            Some(_) => {
                return Err(ConfigError::Schema {
                    path: "preset".into(),
                    message: "expected a string".into(),
                })
            }
        };
        let merged = match preset {
            Some(name) => {
                let mut base =
                    serde_json::to_value(Self::preset(&name)?).expect("config serializes");
                merge(&mut base, doc);
                base["preset"] = Value::String(name);
                base
            }
            None => doc,
        };
        let config: Self =
            serde_path_to_error::deserialize(merged).map_err(|e| ConfigError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate().map_err(ConfigError::Invalid)?;
        Ok(config)
    }

    pub fn load(
        path: &std::path::Path,
        fallback_preset: Option<&str>,
    ) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?, fallback_preset)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.techniques.is_empty() {
            return Err("at least one technique is required".into());
        }
        if !self.techniques.contains(&self.initial_technique) {
            return Err(format!(
                "initial technique {} is not a candidate",
                self.initial_technique
            ));
        }
        for t in &self.techniques {
            match self.familiarity.get(t) {
                Some(f) if (0.0..=1.0).contains(f) => {}
                Some(_) => return Err(format!("familiarity of {t} must lie in [0, 1]")),
                None => return Err(format!("no familiarity score for {t}")),
            }
        }
        self.weights.validate()?;
        if !(self.cone_radius > 0.0 && self.cone_radius < 90.0) {
            return Err("cone_radius must lie in (0, 90)".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err("alpha must lie in (0, 1]".into());
        }
        if self.required == 0 || self.required > self.window {
            return Err("need 1 ≤ required ≤ window".into());
        }
        if !self.margin_threshold.is_finite() {
            return Err("margin_threshold must be finite".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err("beta must be positive".into());
        }
        self.arm.validate()?;
        self.normalization_bounds().validate()?;
        Ok(())
    }

    pub fn normalization_bounds(&self) -> NormalizationBounds {
        self.bounds
            .unwrap_or_else(|| NormalizationBounds::derive(self.cone_radius, self.beta, &self.arm))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Short digest of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
