//! Per-frame decision core: score every target under every candidate
//! technique, average, smooth, pick the weighted-sum winner and switch once a
//! challenger has been ahead often enough within the recent window.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::{AdapterConfig, Weights};
use crate::objectives::{
    normalize, score_accuracy, score_comfort, score_speed, NormalizationBounds, Objective,
    ObjectiveVector,
};
use crate::scene::{ContextFrame, Scene, TargetId};
use crate::techniques::{regions_for, ActivationRegion, Technique};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub optimal: Technique,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterState {
    /// Smoothed per-technique objective scores; absent until the first
    /// non-empty frame.
    pub smoothed: BTreeMap<Technique, ObjectiveVector>,
    pub window: VecDeque<WindowEntry>,
    pub current: Technique,
    pub frame: u64,
}

impl AdapterState {
    pub fn new(config: &AdapterConfig) -> Self {
        Self {
            smoothed: BTreeMap::new(),
            window: VecDeque::with_capacity(config.window + 1),
            current: config.initial_technique,
            frame: 0,
        }
    }
}

/// One target's scores under one technique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScore {
    pub target_id: TargetId,
    pub selectable: bool,
    pub width: f64,
    pub amplitude: f64,
    /// Raw scores before normalization; `None` when unselectable.
    pub raw: Option<ObjectiveVector>,
    pub normalized: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueScore {
    pub technique: Technique,
    pub overall: f64,
    pub smoothed: ObjectiveVector,
    /// This frame's aggregate before smoothing.
    pub aggregate: Option<ObjectiveVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub frame: u64,
    pub from: Technique,
    pub to: Technique,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDecision {
    pub frame: u64,
    /// Empty when nothing has ever been scored.
    pub scores: Vec<TechniqueScore>,
    pub optimal: Technique,
    /// `overall(optimal) - overall(current)` before any switch.
    pub margin: f64,
    /// Active technique after this frame.
    pub current: Technique,
    pub switched: bool,
    pub new_technique: Option<Technique>,
    /// True when the interaction space was empty and state stayed frozen.
    pub idle: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub breakdown: BTreeMap<Technique, Vec<TargetScore>>,
}

impl FrameDecision {
    pub fn score(&self, t: Technique) -> Option<&TechniqueScore> {
        self.scores.iter().find(|s| s.technique == t)
    }

    pub fn switch_event(&self, previous: Technique) -> Option<SwitchEvent> {
        self.new_technique.map(|to| SwitchEvent {
            frame: self.frame,
            from: previous,
            to,
        })
    }
}

/// Raw and normalized scores of one region.
pub fn score_region(
    region: &ActivationRegion,
    technique: Technique,
    ctx: &ContextFrame,
    config: &AdapterConfig,
    bounds: &NormalizationBounds,
) -> TargetScore {
    let familiarity = config.familiarity.get(&technique).copied().unwrap_or(0.0);
    let raw = score_speed(region).map(|speed| {
        let aim = ctx.frame.direction(region.aim_center);
        ObjectiveVector {
            speed,
            accuracy: score_accuracy(region, &config.ed_model),
            comfort: score_comfort(
                &ctx.posture,
                &ctx.frame.forward,
                &aim,
                &config.arm,
                config.beta,
            ),
            familiarity,
        }
    });
    let normalized = match raw {
        Some(r) => r.map(|o, v| normalize(v, bounds.get(o))),
        None => ObjectiveVector::default(),
    };
    TargetScore {
        target_id: region.target_id,
        selectable: region.selectable,
        width: region.width,
        amplitude: region.amplitude,
        raw,
        normalized,
    }
}

/// Unweighted per-objective mean; `None` for no targets.
pub fn aggregate(scores: &[ObjectiveVector]) -> Option<ObjectiveVector> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let mut sum = ObjectiveVector::default();
    for s in scores {
        sum = sum.map(|o, v| v + s.get(o));
    }
    Some(sum.map(|_, v| v / n))
}

/// `α·aggregate + (1-α)·previous`; the first frame takes the aggregate as is.
pub fn smooth(
    aggregate: &ObjectiveVector,
    previous: Option<&ObjectiveVector>,
    alpha: f64,
) -> ObjectiveVector {
    match previous {
        None => *aggregate,
        Some(prev) => aggregate.map(|o, v| alpha * v + (1.0 - alpha) * prev.get(o)),
    }
}

pub fn overall(scores: &ObjectiveVector, weights: &Weights) -> f64 {
    Objective::ALL
        .iter()
        .map(|&o| weights.get(o) * scores.get(o))
        .sum()
}

/// Argmax of `overall`; the current technique wins ties, then declaration order.
pub fn argmax(scores: &[TechniqueScore], current: Technique) -> (Technique, f64) {
    let current_score = scores
        .iter()
        .find(|s| s.technique == current)
        .map(|s| s.overall);
    let mut best = match current_score {
        Some(v) => (current, v),
        None => (scores[0].technique, scores[0].overall),
    };
    for s in scores {
        if s.overall > best.1 {
            best = (s.technique, s.overall);
        }
    }
    best
}

/// Applies the decision rule to already-smoothed scores, updating the window
/// and the current technique.
pub fn decide(
    state: &mut AdapterState,
    scores: Vec<TechniqueScore>,
    config: &AdapterConfig,
) -> FrameDecision {
    let previous = state.current;
    let (optimal, best) = argmax(&scores, previous);
    let current_overall = scores
        .iter()
        .find(|s| s.technique == previous)
        .map_or(f64::NEG_INFINITY, |s| s.overall);
    let margin = best - current_overall;
    state.window.push_back(WindowEntry { optimal, margin });
    while state.window.len() > config.window {
        state.window.pop_front();
    }
    let mut new_technique = None;
    if optimal != previous {
        let support = state
            .window
            .iter()
            .filter(|e| e.optimal == optimal && e.margin > config.margin_threshold)
            .count();
        if support >= config.required {
            state.window.clear();
            state.current = optimal;
            new_technique = Some(optimal);
        }
    }
    FrameDecision {
        frame: state.frame,
        scores,
        optimal,
        margin,
        current: state.current,
        switched: new_technique.is_some(),
        new_technique,
        idle: false,
        breakdown: BTreeMap::new(),
    }
}

/// Full pipeline over one context frame with precomputed regions for every
/// configured technique.
pub fn step(
    ctx: &ContextFrame,
    regions: &BTreeMap<Technique, Vec<ActivationRegion>>,
    config: &AdapterConfig,
    state: &mut AdapterState,
    with_breakdown: bool,
) -> FrameDecision {
    let bounds = config.normalization_bounds();
    let frame = state.frame;
    state.frame += 1;

    if ctx.targets.is_empty() {
        let scores: Vec<TechniqueScore> = config
            .techniques
            .iter()
            .filter_map(|&t| {
                state.smoothed.get(&t).map(|s| TechniqueScore {
                    technique: t,
                    overall: overall(s, &config.weights),
                    smoothed: *s,
                    aggregate: None,
                })
            })
            .collect();
        let optimal = if scores.is_empty() {
            state.current
        } else {
            argmax(&scores, state.current).0
        };
        let margin = scores
            .iter()
            .find(|s| s.technique == optimal)
            .map_or(0.0, |s| s.overall)
            - scores
                .iter()
                .find(|s| s.technique == state.current)
                .map_or(0.0, |s| s.overall);
        return FrameDecision {
            frame,
            scores,
            optimal,
            margin,
            current: state.current,
            switched: false,
            new_technique: None,
            idle: true,
            breakdown: BTreeMap::new(),
        };
    }

    let mut breakdown = BTreeMap::new();
    let mut scores = Vec::with_capacity(config.techniques.len());
    for &t in &config.techniques {
        let per_target: Vec<TargetScore> = match regions.get(&t) {
            Some(rs) => rs
                .iter()
                .map(|r| score_region(r, t, ctx, config, &bounds))
                .collect(),
            None => Vec::new(),
        };
        let normalized: Vec<ObjectiveVector> = per_target.iter().map(|s| s.normalized).collect();
        let agg = aggregate(&normalized);
        let smoothed = match agg {
            Some(a) => smooth(&a, state.smoothed.get(&t), config.alpha),
            None => state.smoothed.get(&t).copied().unwrap_or_default(),
        };
        state.smoothed.insert(t, smoothed);
        scores.push(TechniqueScore {
            technique: t,
            overall: overall(&smoothed, &config.weights),
            smoothed,
            aggregate: agg,
        });
        if with_breakdown {
            breakdown.insert(t, per_target);
        }
    }
    let mut decision = decide(state, scores, config);
    decision.frame = frame;
    decision.breakdown = breakdown;
    decision
}

/// Regions for every configured technique.
pub fn technique_regions(
    scene: &Scene,
    ctx: &ContextFrame,
    config: &AdapterConfig,
) -> BTreeMap<Technique, Vec<ActivationRegion>> {
    config
        .techniques
        .iter()
        .map(|&t| (t, regions_for(t, scene, ctx, &config.regions)))
        .collect()
}

/// Checks the switch rule against a decision stream alone: each switch must
/// be preceded, since the last switch, by at least `n` frames within the last
/// `w` non-idle frames naming the new technique with margin above `t_o`.
pub fn justify_switches(decisions: &[FrameDecision], config: &AdapterConfig) -> Result<(), u64> {
    let mut window: VecDeque<(Technique, f64)> = VecDeque::new();
    for d in decisions.iter().filter(|d| !d.idle) {
        window.push_back((d.optimal, d.margin));
        while window.len() > config.window {
            window.pop_front();
        }
        if let Some(to) = d.new_technique {
            let support = window
                .iter()
                .filter(|(t, m)| *t == to && *m > config.margin_threshold)
                .count();
            if support < config.required {
                return Err(d.frame);
            }
            window.clear();
        }
    }
    Ok(())
}
