//! Batches of trials over environments × target sizes × repetitions × modes.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::environment::{generate_environment, EnvKind, EnvironmentError, EnvironmentSpec};
use super::trial::{run_trial, TrajectoryParams, TrialMode, TrialResult};
use crate::config::{AdapterConfig, ConfigError};
use crate::techniques::Technique;
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    /// Engine preset; overridden field by field by `config`.
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub config: Option<serde_json::Value>,
    #[serde(default = "default_envs")]
    pub environments: Vec<EnvKind>,
    #[serde(default = "default_sizes")]
    pub target_sizes: Vec<f64>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<TrialMode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trajectory: TrajectoryParams,
}

fn default_preset() -> String {
    "study".into()
}
fn default_envs() -> Vec<EnvKind> {
    EnvKind::ALL.to_vec()
}
fn default_sizes() -> Vec<f64> {
    vec![2.5, 0.5]
}
fn default_reps() -> usize {
    8
}
fn default_modes() -> Vec<TrialMode> {
    vec![
        TrialMode::Fixed(Technique::StickyRay),
        TrialMode::Fixed(Technique::RayCursor),
        TrialMode::Adaptive,
    ]
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            preset: default_preset(),
            config: None,
            environments: default_envs(),
            target_sizes: default_sizes(),
            repetitions: default_reps(),
            modes: default_modes(),
            seed: 0,
            trajectory: TrajectoryParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch config invalid at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("batch config invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
}

impl BatchConfig {
    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let batch: Self = serde_path_to_error::deserialize(de).map_err(|e| BatchError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        batch.trajectory.validate().map_err(BatchError::Invalid)?;
        if batch.target_sizes.iter().any(|s| !(*s > 0.0 && *s < 90.0)) {
            return Err(BatchError::Invalid(
                "target sizes must lie in (0, 90) degrees".into(),
            ));
        }
        Ok(batch)
    }

    /// Engine config: the preset with `config` merged on top.
    pub fn adapter_config(&self) -> Result<AdapterConfig, ConfigError> {
        let overrides = self.config.clone().unwrap_or_else(|| serde_json::json!({}));
        let mut doc = overrides;
        if let Some(map) = doc.as_object_mut() {
            map.entry("preset")
                .or_insert_with(|| self.preset.clone().into());
        }
        AdapterConfig::from_json(&doc.to_string(), Some(&self.preset))
    }

    pub fn trial_count(&self) -> usize {
        self.environments.len() * self.target_sizes.len() * self.repetitions * self.modes.len()
    }
}

/// SplitMix64 finalizer over a running state.
fn mix(state: u64, value: u64) -> u64 {
    let mut z = state
        ^ value
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(state << 6)
            .wrapping_add(state >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneKey {
    pub environment: EnvKind,
    pub target_size: f64,
    pub repetition: usize,
    pub seed: u64,
}

impl SceneKey {
    pub fn id(&self) -> String {
        format!(
            "{}-{}-{:02}",
            self.environment, self.target_size, self.repetition
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub id: String,
    pub scene: SceneKey,
    pub mode: TrialMode,
    pub result: TrialResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub environment: EnvKind,
    pub target_size: f64,
    pub mode: TrialMode,
    pub trials: usize,
    pub success_rate: f64,
    /// Trials with at least one missed selection or a timeout.
    pub error_rate: f64,
    pub mean_selection_time: f64,
    pub mean_translation: f64,
    pub mean_rotation: f64,
    pub switching_trials: usize,
    pub mean_switches: f64,
    pub max_switches: usize,
    pub final_raycasting: usize,
    pub final_stickyray: usize,
    pub final_raycursor: usize,
}

pub struct BatchOutput {
    pub config: AdapterConfig,
    pub scenes: Vec<(SceneKey, crate::simulator::Environment)>,
    pub trials: Vec<TrialRecord>,
    pub traces: Vec<Trace>,
}

impl BatchOutput {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(EnvKind, u64, TrialMode), Vec<&TrialResult>> = BTreeMap::new();
        let mut sizes = BTreeMap::new();
        for t in &self.trials {
            let key = (t.scene.environment, t.scene.target_size.to_bits(), t.mode);
            sizes.insert(key, t.scene.target_size);
            groups.entry(key).or_default().push(&t.result);
        }
        groups
            .into_iter()
            .map(|(key, rs)| {
                let n = rs.len() as f64;
                let mean =
                    |f: &dyn Fn(&TrialResult) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
                let switching: Vec<usize> = rs
                    .iter()
                    .map(|r| r.switches.len())
                    .filter(|&s| s > 0)
                    .collect();
                let finals = |t: Technique| rs.iter().filter(|r| r.final_technique == t).count();
                SummaryRow {
                    environment: key.0,
                    target_size: sizes[&key],
                    mode: key.2,
                    trials: rs.len(),
                    success_rate: mean(&|r| f64::from(u8::from(r.success))),
                    error_rate: mean(&|r| f64::from(u8::from(r.error_count > 0 || r.timeout))),
                    mean_selection_time: mean(&|r| r.selection_time),
                    mean_translation: mean(&|r| r.translational_movement),
                    mean_rotation: mean(&|r| r.rotational_movement),
                    switching_trials: switching.len(),
                    mean_switches: if switching.is_empty() {
                        0.0
                    } else {
                        switching.iter().sum::<usize>() as f64 / switching.len() as f64
                    },
                    max_switches: rs.iter().map(|r| r.switches.len()).max().unwrap_or(0),
                    final_raycasting: finals(Technique::RayCasting),
                    final_stickyray: finals(Technique::StickyRay),
                    final_raycursor: finals(Technique::RayCursor),
                }
            })
            .collect()
    }

    pub fn summary_csv(&self) -> Result<String, BatchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let rows = self.summary();
        if rows.is_empty() {
            w.write_record(SUMMARY_COLUMNS)?;
        }
        for row in rows {
            w.serialize(row)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("CSV is UTF-8"))
    }

    pub fn trials_csv(&self) -> Result<String, BatchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRIAL_COLUMNS)?;
        for t in &self.trials {
            let r = &t.result;
            w.write_record([
                t.id.clone(),
                t.scene.environment.to_string(),
                t.scene.target_size.to_string(),
                t.scene.repetition.to_string(),
                t.mode.to_string(),
                r.success.to_string(),
                r.selection_time.to_string(),
                r.translational_movement.to_string(),
                r.rotational_movement.to_string(),
                r.error_count.to_string(),
                r.switches.len().to_string(),
                r.final_technique.to_string(),
                r.timeout.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("CSV is UTF-8"))
    }

    /// Writes `summary.csv`, `trials.csv`, `traces/<id>.jsonl`,
    /// `scenes/<scene>.json` and the resolved `config.json`.
    pub fn write(&self, dir: &Path) -> Result<(), BatchError> {
        std::fs::create_dir_all(dir.join("traces"))?;
        std::fs::create_dir_all(dir.join("scenes"))?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv()?)?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv()?)?;
        std::fs::write(dir.join("config.json"), self.config.to_json() + "\n")?;
        for (key, env) in &self.scenes {
            env.scene
                .save(&dir.join("scenes").join(format!("{}.json", key.id())))?;
        }
        for (t, trace) in self.trials.iter().zip(&self.traces) {
            trace.save(&dir.join("traces").join(format!("{}.jsonl", t.id)))?;
        }
        Ok(())
    }
}

pub const SUMMARY_COLUMNS: [&str; 15] = [
    "environment",
    "target_size",
    "mode",
    "trials",
    "success_rate",
    "error_rate",
    "mean_selection_time",
    "mean_translation",
    "mean_rotation",
    "switching_trials",
    "mean_switches",
    "max_switches",
    "final_raycasting",
    "final_stickyray",
    "final_raycursor",
];

const TRIAL_COLUMNS: [&str; 13] = [
    "id",
    "environment",
    "target_size",
    "repetition",
    "mode",
    "success",
    "selection_time",
    "translational_movement",
    "rotational_movement",
    "error_count",
    "switches",
    "final_technique",
    "timeout",
];

/// Generates every scene, then runs every (scene, mode) trial. Trials run in
/// parallel; output order is fixed by trial id.
pub fn run_batch(batch: &BatchConfig) -> Result<BatchOutput, BatchError> {
    let config = batch.adapter_config()?;
    batch.trajectory.validate().map_err(BatchError::Invalid)?;
    let mut keys = Vec::new();
    for &env in &batch.environments {
        for &size in &batch.target_sizes {
            for rep in 0..batch.repetitions {
                let seed = mix(
                    mix(mix(batch.seed, env as u64 + 1), size.to_bits()),
                    rep as u64 + 1,
                );
                keys.push(SceneKey {
                    environment: env,
                    target_size: size,
                    repetition: rep,
                    seed,
                });
            }
        }
    }
    let scenes: Vec<(SceneKey, crate::simulator::Environment)> = keys
        .into_par_iter()
        .map(|k| {
            let spec = EnvironmentSpec::new(k.environment, k.target_size, k.seed);
            generate_environment(&spec).map(|e| (k, e))
        })
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, TrialMode)> = (0..scenes.len())
        .flat_map(|i| batch.modes.iter().map(move |&m| (i, m)))
        .collect();
    let mut runs: Vec<(TrialRecord, Trace)> = jobs
        .into_par_iter()
        .map(|(i, mode)| {
            let (key, env) = &scenes[i];
            let (result, mut trace) = run_trial(
                &env.scene,
                env.target,
                &env.spec.center(),
                mode,
                &batch.trajectory,
                &config,
                mix(key.seed, 0x7472_6961_6c),
            );
            let id = format!("{}-{}", key.id(), mode);
            trace.header.label = Some(id.clone());
            (
                TrialRecord {
                    id,
                    scene: key.clone(),
                    mode,
                    result,
                },
                trace,
            )
        })
        .collect();
    runs.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let (trials, traces) = runs.into_iter().unzip();
    Ok(BatchOutput {
        config,
        scenes,
        trials,
        traces,
    })
}
