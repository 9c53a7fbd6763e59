//! Online-reliability layer: observation semantics, case evaluation,
//! percent-change reporting, evidence sessions, and sensitivity sweeps.
//!
//! Two observation classes exist. Hard observations pin a root to a state
//! and enter inference as conditioning evidence. Soft observations replace
//! the root's prior in a copy of the model: a scaled observation resolves to
//! `original × (1 + pct/100)` — always from the *original* model prior, never
//! a previously scaled one — clamping to 1.0 with a recorded warning; an
//! absolute observation substitutes the given probability directly.
//!
//! Every evaluation reports baseline (original priors, no evidence),
//! posterior, signed percent change, a direction flag, and a per-observation
//! echo with resolved priors and clamp warnings. Cases are independent;
//! sessions hold the latest observation per target and re-derive each report
//! from the original model, so appends never compound.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::bn::{compile_to_bn, eliminate_probability, BayesNet, BnError, EvidenceAssignment};
use crate::ftree::{natural_cmp, Diagnostic, FaultTree};

/// Where an observation came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Manual,
    Drone,
    Simulated,
}

/// What an observation asserts about its target event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObservationKind {
    /// The event state was determined outright.
    Hard { value: bool },
    /// The event prior changed by `pct` percent from its original value.
    Scaled { pct: f64 },
    /// The event prior was re-estimated outright.
    Absolute { p: f64 },
}

/// One monitoring observation about a basic event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub event: String,
    #[serde(flatten)]
    pub kind: ObservationKind,
    #[serde(default)]
    pub source: Source,
    /// Capture instant as Unix epoch milliseconds, when the producer has a
    /// clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<u64>,
}

impl Observation {
    pub fn hard(event: &str, value: bool) -> Self {
        Observation {
            event: String::from(event),
            kind: ObservationKind::Hard { value },
            source: Source::Manual,
            timestamp_ms: None,
        }
    }

    pub fn scaled(event: &str, pct: f64) -> Self {
        Observation {
            event: String::from(event),
            kind: ObservationKind::Scaled { pct },
            source: Source::Manual,
            timestamp_ms: None,
        }
    }

    pub fn absolute(event: &str, p: f64) -> Self {
        Observation {
            event: String::from(event),
            kind: ObservationKind::Absolute { p },
            source: Source::Manual,
            timestamp_ms: None,
        }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_timestamp_ms(mut self, ms: u64) -> Self {
        self.timestamp_ms = Some(ms);
        self
    }
}

/// Event ids the monitoring channel can report on; a subset of the model's
/// basic events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservabilitySet {
    events: BTreeSet<String>,
}

impl ObservabilitySet {
    pub fn contains(&self, event: &str) -> bool {
        self.events.contains(event)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Every basic event of the model.
    pub fn all_events(ft: &FaultTree) -> Self {
        ft.events.iter().map(|e| e.id.as_str()).collect()
    }

    /// Reject ids that are not basic events of the model.
    pub fn validate_against(&self, ft: &FaultTree) -> Result<(), EvidenceError> {
        for id in self.iter() {
            if !ft.is_event(id) {
                return Err(EvidenceError::UnknownTarget(String::from(id)));
            }
        }
        Ok(())
    }
}

impl<S: Into<String>> FromIterator<S> for ObservabilitySet {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        ObservabilitySet {
            events: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// A labelled batch of observations evaluated together against one model.
/// Duplicate targets within a case are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceCase {
    pub label: String,
    pub observations: Vec<Observation>,
}

/// How each observation entered the computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationEcho {
    pub event: String,
    #[serde(flatten)]
    pub kind: ObservationKind,
    /// The prior actually substituted into the model; absent for hard
    /// observations, which condition instead of re-weighting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved_prior: Option<f64>,
    /// True when a scaled observation exceeded 1.0 and was clamped.
    pub clamped: bool,
}

/// Whether the posterior moved up, down, or not at all relative to baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    pub fn glyph(self) -> &'static str {
        match self {
            Direction::Up => "↑",
            Direction::Down => "↓",
            Direction::Flat => "=",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Flat => "flat",
        })
    }
}

/// The outcome of evaluating one evidence case (or one session step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    /// Fingerprint of the model the report was computed against.
    pub fingerprint: String,
    pub case: String,
    /// P(top) with original priors and no evidence.
    pub baseline: f64,
    /// P(top) after applying the case's observations.
    pub posterior: f64,
    /// (posterior − baseline) / baseline × 100; exactly 0 when unchanged.
    pub pct_change: f64,
    pub direction: Direction,
    pub observations: Vec<ObservationEcho>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvidenceError {
    #[error("no basic event named `{0}`")]
    UnknownTarget(String),
    #[error("duplicate observation target `{0}` in one case")]
    DuplicateTarget(String),
    #[error("scaled observation on `{event}` has pct {pct} below -100")]
    ScaleBelowNegative100 { event: String, pct: f64 },
    #[error("absolute prior {p} for `{event}` is outside [0, 1]")]
    InvalidAbsolutePrior { event: String, p: f64 },
    #[error("event `{0}` is not in the session's observability set")]
    NotObservable(String),
    #[error("model failed validation with {} error(s)", .0.len())]
    InvalidModel(Vec<Diagnostic>),
    #[error(transparent)]
    Bn(#[from] BnError),
}

fn pct_change(baseline: f64, posterior: f64) -> (f64, Direction) {
    if posterior == baseline {
        (0.0, Direction::Flat)
    } else if posterior > baseline {
        ((posterior - baseline) / baseline * 100.0, Direction::Up)
    } else {
        ((posterior - baseline) / baseline * 100.0, Direction::Down)
    }
}

/// Resolve one observation against the original model priors. Returns the
/// echo plus either a prior substitution or a hard conditioning entry.
fn resolve_observation(
    ft: &FaultTree,
    obs: &Observation,
) -> Result<(ObservationEcho, Option<f64>, Option<bool>), EvidenceError> {
    let event = ft
        .event(&obs.event)
        .ok_or_else(|| EvidenceError::UnknownTarget(obs.event.clone()))?;
    let mut echo = ObservationEcho {
        event: obs.event.clone(),
        kind: obs.kind.clone(),
        resolved_prior: None,
        clamped: false,
    };
    Ok(match obs.kind {
        ObservationKind::Hard { value } => (echo, None, Some(value)),
        ObservationKind::Scaled { pct } => {
            if pct < -100.0 || !pct.is_finite() {
                return Err(EvidenceError::ScaleBelowNegative100 {
                    event: obs.event.clone(),
                    pct,
                });
            }
            let raw = event.prior * (1.0 + pct / 100.0);
            let resolved = if raw > 1.0 {
                echo.clamped = true;
                1.0
            } else {
                raw
            };
            echo.resolved_prior = Some(resolved);
            (echo, Some(resolved), None)
        }
        ObservationKind::Absolute { p } => {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(EvidenceError::InvalidAbsolutePrior {
                    event: obs.event.clone(),
                    p,
                });
            }
            echo.resolved_prior = Some(p);
            (echo, Some(p), None)
        }
    })
}

/// Compile once, then evaluate a set of observations against the original
/// model: soft observations substitute priors, hard observations condition.
fn evaluate(
    ft: &FaultTree,
    bn: &BayesNet,
    observations: &[&Observation],
) -> Result<(f64, Vec<ObservationEcho>), EvidenceError> {
    let mut modified = bn.clone();
    let mut assignment = EvidenceAssignment::new();
    let mut echoes = Vec::with_capacity(observations.len());
    for obs in observations {
        let (echo, substituted_prior, pinned) = resolve_observation(ft, obs)?;
        if let Some(prior) = substituted_prior {
            modified = modified.with_root_prior(&obs.event, prior)?;
        }
        if let Some(value) = pinned {
            assignment.set(&obs.event, value);
        }
        echoes.push(echo);
    }
    let posterior = eliminate_probability(&modified, &assignment)?.probability;
    Ok((posterior, echoes))
}

/// Evaluate one labelled case against the model. Baseline uses original
/// priors with no evidence; the posterior applies every observation.
pub fn apply_case(ft: &FaultTree, case: &EvidenceCase) -> Result<ReliabilityReport, EvidenceError> {
    let bn = compile_to_bn(ft).map_err(EvidenceError::InvalidModel)?;
    let fingerprint = crate::ftree::fingerprint(ft)
        .map_err(EvidenceError::InvalidModel)?
        .digest;
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for obs in &case.observations {
        if !seen.insert(obs.event.as_str()) {
            return Err(EvidenceError::DuplicateTarget(obs.event.clone()));
        }
    }
    let baseline = eliminate_probability(&bn, &EvidenceAssignment::new())?.probability;
    let refs: Vec<&Observation> = case.observations.iter().collect();
    let (posterior, echoes) = evaluate(ft, &bn, &refs)?;
    let (pct, direction) = pct_change(baseline, posterior);
    Ok(ReliabilityReport {
        fingerprint,
        case: case.label.clone(),
        baseline,
        posterior,
        pct_change: pct,
        direction,
        observations: echoes,
    })
}

/// One entry of a suite run: the case label plus its report or error.
#[derive(Debug)]
pub struct CaseOutcome {
    pub label: String,
    pub result: Result<ReliabilityReport, EvidenceError>,
}

/// Evaluate cases independently and in order; a failing case is recorded and
/// the suite continues.
pub fn run_case_suite(ft: &FaultTree, cases: &[EvidenceCase]) -> Vec<CaseOutcome> {
    cases
        .iter()
        .map(|case| CaseOutcome {
            label: case.label.clone(),
            result: apply_case(ft, case),
        })
        .collect()
}

/// One committed session step: the observation and the report it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub observation: Observation,
    pub report: ReliabilityReport,
}

/// An append-only evidence stream over one model. The session keeps the
/// latest observation per target; every report is re-derived from original
/// priors, so scaled observations never compound.
#[derive(Debug, Clone)]
pub struct Session {
    ft: FaultTree,
    bn: BayesNet,
    fingerprint: String,
    observability: ObservabilitySet,
    latest: BTreeMap<String, Observation>,
    log: Vec<SessionEntry>,
}

impl Session {
    /// Open a session; the observability set must be a subset of the model's
    /// basic events.
    pub fn open(ft: &FaultTree, observability: ObservabilitySet) -> Result<Session, EvidenceError> {
        observability.validate_against(ft)?;
        let bn = compile_to_bn(ft).map_err(EvidenceError::InvalidModel)?;
        Ok(Session {
            fingerprint: crate::ftree::fingerprint(ft)
                .map_err(EvidenceError::InvalidModel)?
                .digest,
            ft: ft.clone(),
            bn,
            observability,
            latest: BTreeMap::new(),
            log: Vec::new(),
        })
    }

    pub fn observability(&self) -> &ObservabilitySet {
        &self.observability
    }

    pub fn log(&self) -> &[SessionEntry] {
        &self.log
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Append one observation, superseding any earlier observation of the
    /// same target, and return the fresh report. On error the session state
    /// is unchanged.
    pub fn append(&mut self, obs: Observation) -> Result<ReliabilityReport, EvidenceError> {
        if !self.ft.is_event(&obs.event) {
            return Err(EvidenceError::UnknownTarget(obs.event.clone()));
        }
        if !self.observability.contains(&obs.event) {
            return Err(EvidenceError::NotObservable(obs.event.clone()));
        }

        let mut active: BTreeMap<&str, &Observation> = self
            .latest
            .iter()
            .map(|(id, o)| (id.as_str(), o))
            .collect();
        active.insert(obs.event.as_str(), &obs);
        let mut ordered: Vec<&Observation> = active.into_values().collect();
        ordered.sort_by(|a, b| natural_cmp(&a.event, &b.event));

        let baseline = eliminate_probability(&self.bn, &EvidenceAssignment::new())?.probability;
        let (posterior, echoes) = evaluate(&self.ft, &self.bn, &ordered)?;
        let (pct, direction) = pct_change(baseline, posterior);
        let report = ReliabilityReport {
            fingerprint: self.fingerprint.clone(),
            case: format!("step-{}", self.log.len() + 1),
            baseline,
            posterior,
            pct_change: pct,
            direction,
            observations: echoes,
        };

        self.latest.insert(obs.event.clone(), obs.clone());
        self.log.push(SessionEntry {
            observation: obs,
            report: report.clone(),
        });
        Ok(report)
    }
}

/// One point of a sensitivity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub prior: f64,
    pub probability: f64,
}

/// P(top) as one event's prior moves across a grid, all other priors
/// original. Coherent (AND/OR) models yield non-decreasing curves.
pub fn sweep(ft: &FaultTree, target: &str, grid: &[f64]) -> Result<Vec<SweepPoint>, EvidenceError> {
    if !ft.is_event(target) {
        return Err(EvidenceError::UnknownTarget(String::from(target)));
    }
    for &p in grid {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(EvidenceError::InvalidAbsolutePrior {
                event: String::from(target),
                p,
            });
        }
    }
    let bn = compile_to_bn(ft).map_err(EvidenceError::InvalidModel)?;
    // P(top) is affine in any single root prior g:
    //   P(g) = (1 - g) * P(g = 0) + g * P(g = 1).
    // Evaluating the two vertices once and interpolating is exact, and it
    // makes the curve monotone by construction: the slope is clamped to the
    // sign AND/OR coherence guarantees, and multiplying an ascending grid by
    // a fixed non-negative slope is weakly monotone in floating point,
    // whereas independent per-point eliminations can jitter by one ulp.
    let no_evidence = EvidenceAssignment::new();
    let at_zero =
        eliminate_probability(&bn.with_root_prior(target, 0.0)?, &no_evidence)?.probability;
    let at_one =
        eliminate_probability(&bn.with_root_prior(target, 1.0)?, &no_evidence)?.probability;
    let slope = (at_one - at_zero).max(0.0);
    let mut points = Vec::with_capacity(grid.len());
    for &prior in grid {
        let probability = (at_zero + slope * prior).min(1.0);
        points.push(SweepPoint { prior, probability });
    }
    Ok(points)
}
