//! Seeded drone-inspection mission simulator.
//!
//! A mission sweeps every blade surface of a turbine, draws a feature sample
//! per surface from a location-scale family fitted to the trusted reference
//! sample, and runs each draw through the confidence gate. A scenario's
//! distribution-shift magnitude moves the observed features away from the
//! trusted ones (location shift plus mild variance inflation — the blur and
//! noise knobs); its per-event degradation levels decide which observations
//! a successful mission emits: level 1 becomes a hard True observation,
//! intermediate levels become scaled-prior observations (`level × max_pct`
//! percent), level 0 emits nothing.
//!
//! Randomness comes from an embedded splitmix-style 64-bit generator with
//! transcendentals routed through `libm`, so a seed reproduces bit-identical
//! missions on every platform. Mission timing is bookkeeping only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::evidence::{
    EvidenceError, Observation, ObservabilitySet, ReliabilityReport, Session, Source,
};
use crate::ftree::{natural_cmp, FaultTree};
use crate::gate::{
    evaluate_gate, DistanceReport, FeatureSample, GateAction, GateDecision, GateError,
    GateThresholds, Measure, MIN_GATED_SAMPLE,
};

/// Retries allowed in the recapture band before escalating to manual
/// inspection.
pub const DEFAULT_MAX_RECAPTURES: u32 = 3;

/// Deterministic 64-bit generator (splitmix construction): tiny state, full
/// 2^64 period, stable output across platforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

const TWO_POW_NEG53: f64 = 1.0 / (1u64 << 53) as f64;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG53
    }

    /// Standard normal draw via the Box–Muller transform; consumes two
    /// uniforms per call (no second-value caching, keeping the stream
    /// position a pure function of the call count).
    pub fn next_gaussian(&mut self) -> f64 {
        // in (0, 1] so the logarithm is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53;
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }
}

/// The four inspected blade surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    LeadingEdge,
    SuctionSide,
    PressureSide,
    TrailingEdge,
}

impl Surface {
    pub const ALL: [Surface; 4] = [
        Surface::LeadingEdge,
        Surface::SuctionSide,
        Surface::PressureSide,
        Surface::TrailingEdge,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Surface::LeadingEdge => "leading_edge",
            Surface::SuctionSide => "suction_side",
            Surface::PressureSide => "pressure_side",
            Surface::TrailingEdge => "trailing_edge",
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

fn default_turbine() -> String {
    String::from("turbine-1")
}

fn default_blades() -> u32 {
    3
}

fn default_images() -> usize {
    256
}

fn default_duration() -> u32 {
    75
}

fn default_drones() -> u32 {
    1
}

fn default_window() -> (u32, u32) {
    (60, 90)
}

/// What one inspection mission covers. Surfaces are fixed to the four blade
/// surfaces; everything else is configurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionPlan {
    #[serde(default = "default_turbine")]
    pub turbine: String,
    #[serde(default = "default_blades")]
    pub blades: u32,
    #[serde(default = "default_images")]
    pub images_per_surface: usize,
    #[serde(default = "default_duration")]
    pub duration_minutes: u32,
    #[serde(default = "default_drones")]
    pub drones: u32,
    /// Allowed mission duration in minutes, inclusive.
    #[serde(default = "default_window")]
    pub duration_window: (u32, u32),
}

impl Default for MissionPlan {
    fn default() -> Self {
        MissionPlan {
            turbine: default_turbine(),
            blades: default_blades(),
            images_per_surface: default_images(),
            duration_minutes: default_duration(),
            drones: default_drones(),
            duration_window: default_window(),
        }
    }
}

impl MissionPlan {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.blades == 0 || self.drones == 0 {
            return Err(SimError::DegeneratePlan);
        }
        if self.images_per_surface < MIN_GATED_SAMPLE {
            return Err(SimError::TooFewImages(self.images_per_surface));
        }
        let (low, high) = self.duration_window;
        if low > high || self.duration_minutes < low || self.duration_minutes > high {
            return Err(SimError::DurationOutOfWindow {
                minutes: self.duration_minutes,
                low,
                high,
            });
        }
        Ok(())
    }
}

fn default_max_pct() -> f64 {
    75.0
}

/// Ground truth injected into a mission: per-event degradation levels plus a
/// feature-distribution shift magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScenario {
    /// Degradation level in [0, 1] per observable event; 0 means healthy.
    #[serde(default)]
    pub degradations: BTreeMap<String, f64>,
    /// Location shift applied to generated features, in trusted-sd units.
    #[serde(default)]
    pub shift: f64,
    /// Percentage a fully degraded (level → 1) event would scale its prior
    /// by; intermediate levels scale linearly.
    #[serde(default = "default_max_pct")]
    pub max_pct: f64,
}

impl Default for AnomalyScenario {
    fn default() -> Self {
        AnomalyScenario {
            degradations: BTreeMap::new(),
            shift: 0.0,
            max_pct: default_max_pct(),
        }
    }
}

impl AnomalyScenario {
    pub fn validate(&self, observability: &ObservabilitySet) -> Result<(), SimError> {
        for (event, &level) in &self.degradations {
            if !(0.0..=1.0).contains(&level) || !level.is_finite() {
                return Err(SimError::InvalidLevel {
                    event: event.clone(),
                    level,
                });
            }
            if !observability.contains(event) {
                return Err(SimError::UnobservableTarget(event.clone()));
            }
        }
        if !self.shift.is_finite() || self.shift < 0.0 {
            return Err(SimError::InvalidShift(self.shift));
        }
        if !self.max_pct.is_finite() || self.max_pct <= 0.0 {
            return Err(SimError::InvalidMaxPct(self.max_pct));
        }
        Ok(())
    }

    /// The observation a degradation level maps to, if any.
    fn observation_for(&self, event: &str, level: f64) -> Option<Observation> {
        if level == 0.0 {
            None
        } else if level >= 1.0 {
            Some(Observation::hard(event, true).with_source(Source::Simulated))
        } else {
            Some(Observation::scaled(event, level * self.max_pct).with_source(Source::Simulated))
        }
    }
}

/// The full input to one `simulate` run: an optional plan override plus the
/// scenario. This is the schema of the scenario JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    #[serde(default)]
    pub plan: MissionPlan,
    #[serde(default)]
    pub scenario: AnomalyScenario,
}

/// One gated capture attempt chain for a blade surface. Recapture retries
/// are recorded in `recaptures`, not as extra records; `sample`, `distance`,
/// and `decision` describe the final attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub blade: u32,
    pub surface: Surface,
    pub drone: u32,
    pub sample: FeatureSample,
    pub distance: DistanceReport,
    pub decision: GateDecision,
    pub recaptures: u32,
}

/// Everything a mission produced: the capture log and the observations
/// ready for an evidence session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionOutcome {
    pub captures: Vec<CaptureRecord>,
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("mission needs at least one blade and one drone")]
    DegeneratePlan,
    #[error("mission duration {minutes} min is outside the window [{low}, {high}]")]
    DurationOutOfWindow { minutes: u32, low: u32, high: u32 },
    #[error("{0} images per surface is below the gateable minimum {MIN_GATED_SAMPLE}")]
    TooFewImages(usize),
    #[error("degradation level {level} for `{event}` is outside [0, 1]")]
    InvalidLevel { event: String, level: f64 },
    #[error("scenario targets `{0}`, which is not in the observability set")]
    UnobservableTarget(String),
    #[error("feature shift {0} must be finite and non-negative")]
    InvalidShift(f64),
    #[error("max_pct {0} must be finite and positive")]
    InvalidMaxPct(f64),
    #[error(transparent)]
    Gate(#[from] GateError),
}

fn sample_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = libm::sqrt(ss / (n - 1.0));
    (mean, sd)
}

/// Run one mission: sweep blades × surfaces, gate every capture against the
/// trusted sample, retry recapture decisions with fresh draws up to
/// [`DEFAULT_MAX_RECAPTURES`], then — if at least one capture proceeded —
/// emit the scenario's observations in natural event order. Deterministic
/// given the seed.
pub fn run_mission(
    plan: &MissionPlan,
    scenario: &AnomalyScenario,
    observability: &ObservabilitySet,
    trusted: &FeatureSample,
    thresholds: GateThresholds,
    measure: Measure,
    seed: u64,
) -> Result<MissionOutcome, SimError> {
    plan.validate()?;
    scenario.validate(observability)?;
    thresholds.validate()?;

    let (mean, sd) = sample_stats(trusted.values());
    let offset = scenario.shift * sd;
    let observed_sd = sd * (1.0 + scenario.shift / 2.0);
    let mut rng = SplitMix64::new(seed);

    let mut captures = Vec::with_capacity(plan.blades as usize * Surface::ALL.len());
    let mut capture_index = 0u32;
    for blade in 1..=plan.blades {
        for surface in Surface::ALL {
            let drone = capture_index % plan.drones + 1;
            capture_index += 1;

            let mut recaptures = 0u32;
            let (sample, distance, decision) = loop {
                let values: Vec<f64> = (0..plan.images_per_surface)
                    .map(|_| mean + offset + observed_sd * rng.next_gaussian())
                    .collect();
                let label = format!("{}/blade{}/{}", plan.turbine, blade, surface.token());
                let observed = FeatureSample::new(&label, values)?;
                let (distance, decision) = evaluate_gate(measure, trusted, &observed, thresholds)?;
                if decision.action == GateAction::Recapture && recaptures < DEFAULT_MAX_RECAPTURES {
                    recaptures += 1;
                    continue;
                }
                break (observed, distance, decision);
            };
            // A surface still in the recapture band after the last retry
            // has exhausted its budget: escalate.
            let decision = if decision.action == GateAction::Recapture {
                GateDecision {
                    action: GateAction::ManualInspection,
                    ..decision
                }
            } else {
                decision
            };
            captures.push(CaptureRecord {
                blade,
                surface,
                drone,
                sample,
                distance,
                decision,
                recaptures,
            });
        }
    }

    let proceeded = captures
        .iter()
        .any(|c| c.decision.action == GateAction::Proceed);
    let mut observations = Vec::new();
    if proceeded {
        let mut events: Vec<&String> = scenario.degradations.keys().collect();
        events.sort_by(|a, b| natural_cmp(a, b));
        for event in events {
            if let Some(obs) = scenario.observation_for(event, scenario.degradations[event]) {
                observations.push(obs);
            }
        }
    }

    Ok(MissionOutcome {
        captures,
        observations,
    })
}

/// Feed mission observations into a fresh evidence session, in order, and
/// return the per-step report timeline.
pub fn mission_to_session(
    ft: &FaultTree,
    observability: ObservabilitySet,
    observations: &[Observation],
) -> Result<Vec<ReliabilityReport>, EvidenceError> {
    let mut session = Session::open(ft, observability)?;
    let mut timeline = Vec::with_capacity(observations.len());
    for obs in observations {
        timeline.push(session.append(obs.clone())?);
    }
    Ok(timeline)
}
