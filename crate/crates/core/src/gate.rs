//! Statistical-distance confidence gate for inspection imagery.
//!
//! Newly captured feature samples are compared against a trusted reference
//! sample with one of five two-sample ECDF distances; the distance is
//! normalized into a confidence in [0, 1], and the confidence is partitioned
//! into a three-way action: manual inspection, recapture, or proceed.
//!
//! Normalization conventions (declared, tested, and deliberately simple):
//! KS confidence is `1 − D`; Kuiper confidence is `1 − V/2`; the unbounded
//! measures (Cramér–von Mises, Anderson–Darling, Wasserstein-1) use
//! `exp(−d / scale)` with the scale defaulting to the trusted sample's
//! interquartile range (linear-interpolation quantiles), falling back to 1
//! when the IQR degenerates to zero. All are monotone decreasing in the
//! distance, which is the only property downstream logic relies on.
//!
//! Decision boundaries are closed on the higher-confidence side:
//! `confidence ≥ tau_high` proceeds, `confidence ≥ tau_low` recaptures.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Smallest sample size accepted for gating.
pub const MIN_GATED_SAMPLE: usize = 8;

/// One feature channel extracted from a batch of images: a labelled,
/// non-empty list of finite scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSample {
    pub label: String,
    values: Vec<f64>,
}

impl FeatureSample {
    pub fn new(label: &str, values: Vec<f64>) -> Result<FeatureSample, GateError> {
        if values.is_empty() {
            return Err(GateError::EmptySample {
                label: String::from(label),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GateError::NonFiniteValue {
                label: String::from(label),
            });
        }
        Ok(FeatureSample {
            label: String::from(label),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        sorted
    }

    fn check_gateable(&self) -> Result<(), GateError> {
        if self.values.len() < MIN_GATED_SAMPLE {
            return Err(GateError::UndersizedSample {
                label: self.label.clone(),
                len: self.values.len(),
                min: MIN_GATED_SAMPLE,
            });
        }
        Ok(())
    }
}

/// Two-sample ECDF distance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "ks")]
    Ks,
    #[serde(rename = "kuiper")]
    Kuiper,
    #[serde(rename = "cvm")]
    CramerVonMises,
    #[serde(rename = "ad")]
    AndersonDarling,
    #[serde(rename = "w1")]
    Wasserstein1,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Ks,
        Measure::Kuiper,
        Measure::CramerVonMises,
        Measure::AndersonDarling,
        Measure::Wasserstein1,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Measure::Ks => "ks",
            Measure::Kuiper => "kuiper",
            Measure::CramerVonMises => "cvm",
            Measure::AndersonDarling => "ad",
            Measure::Wasserstein1 => "w1",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Measure {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Measure, GateError> {
        Measure::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| GateError::UnknownMeasure(String::from(s)))
    }
}

/// A measured distance and its normalized confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub measure: Measure,
    /// The raw distance; KS and Kuiper lie in [0, 1], the rest are ≥ 0.
    pub value: f64,
    /// Normalized confidence in [0, 1]; higher means more similar.
    pub confidence: f64,
}

/// Confidence cut points; `0 ≤ tau_low < tau_high ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateThresholds {
    pub tau_low: f64,
    pub tau_high: f64,
}

impl Default for GateThresholds {
    fn default() -> Self {
        GateThresholds {
            tau_low: 0.6,
            tau_high: 0.9,
        }
    }
}

impl GateThresholds {
    pub fn new(tau_low: f64, tau_high: f64) -> Result<GateThresholds, GateError> {
        let t = GateThresholds { tau_low, tau_high };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), GateError> {
        let ordered = self.tau_low >= 0.0 && self.tau_low < self.tau_high && self.tau_high <= 1.0;
        if !ordered || !self.tau_low.is_finite() || !self.tau_high.is_finite() {
            return Err(GateError::InvalidThresholds {
                tau_low: self.tau_low,
                tau_high: self.tau_high,
            });
        }
        Ok(())
    }
}

/// The three-way gate outcome, ordered from worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateAction {
    ManualInspection,
    Recapture,
    Proceed,
}

impl fmt::Display for GateAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateAction::ManualInspection => "manual_inspection",
            GateAction::Recapture => "recapture",
            GateAction::Proceed => "proceed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub action: GateAction,
    pub confidence: f64,
    /// The measure that produced the confidence, when one did.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GateError {
    #[error("sample `{label}` is empty")]
    EmptySample { label: String },
    #[error("sample `{label}` contains a non-finite value")]
    NonFiniteValue { label: String },
    #[error("sample `{label}` has {len} values; gating needs at least {min}")]
    UndersizedSample { label: String, len: usize, min: usize },
    #[error("thresholds ({tau_low}, {tau_high}) must satisfy 0 <= low < high <= 1")]
    InvalidThresholds { tau_low: f64, tau_high: f64 },
    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("scale {0} must be finite and positive")]
    InvalidScale(f64),
    #[error("unknown measure `{0}` (expected ks, kuiper, cvm, ad, or w1)")]
    UnknownMeasure(String),
    #[error("cannot gate on zero feature channels")]
    NoChannels,
}

/// One step of the merged walk over the pooled distinct values of two sorted
/// samples: the value, its pooled multiplicity, and both ECDFs evaluated at
/// (i.e. just after) the value.
struct MergeStep {
    value: f64,
    multiplicity: usize,
    f_trusted: f64,
    f_observed: f64,
}

fn merge_walk<'a>(
    trusted: &'a [f64],
    observed: &'a [f64],
) -> impl Iterator<Item = MergeStep> + 'a {
    let n = trusted.len();
    let m = observed.len();
    let mut i = 0usize;
    let mut j = 0usize;
    core::iter::from_fn(move || {
        if i >= n && j >= m {
            return None;
        }
        let value = match (trusted.get(i), observed.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        let mut multiplicity = 0usize;
        while i < n && trusted[i] == value {
            i += 1;
            multiplicity += 1;
        }
        while j < m && observed[j] == value {
            j += 1;
            multiplicity += 1;
        }
        Some(MergeStep {
            value,
            multiplicity,
            f_trusted: i as f64 / n as f64,
            f_observed: j as f64 / m as f64,
        })
    })
}

/// sup |F̂_t − F̂_o| over the pooled sample.
fn ks_distance(t: &[f64], o: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for step in merge_walk(t, o) {
        sup = sup.max((step.f_trusted - step.f_observed).abs());
    }
    sup
}

/// sup(F̂_t − F̂_o) + sup(F̂_o − F̂_t); never below the KS distance.
fn kuiper_distance(t: &[f64], o: &[f64]) -> f64 {
    let mut d_plus = 0.0f64;
    let mut d_minus = 0.0f64;
    for step in merge_walk(t, o) {
        d_plus = d_plus.max(step.f_trusted - step.f_observed);
        d_minus = d_minus.max(step.f_observed - step.f_trusted);
    }
    d_plus + d_minus
}

/// Two-sample Cramér–von Mises statistic in its ECDF form:
/// T = nm/(n+m)² · Σ_k c_k (F̂_t − F̂_o)², summed over distinct pooled
/// values with multiplicity c_k, ECDFs evaluated at the value.
fn cvm_distance(t: &[f64], o: &[f64]) -> f64 {
    let n = t.len() as f64;
    let m = o.len() as f64;
    let mut sum = 0.0f64;
    for step in merge_walk(t, o) {
        let diff = step.f_trusted - step.f_observed;
        sum += step.multiplicity as f64 * diff * diff;
    }
    n * m / ((n + m) * (n + m)) * sum
}

/// Two-sample Anderson–Darling statistic in its ECDF form:
/// A² = nm/N · Σ_k c_k (F̂_t − F̂_o)² / (H(1−H)) with H the pooled ECDF,
/// skipping pooled-boundary terms where H(1−H) = 0 (always the last step).
fn ad_distance(t: &[f64], o: &[f64]) -> f64 {
    let n = t.len() as f64;
    let m = o.len() as f64;
    let total = n + m;
    let mut sum = 0.0f64;
    for step in merge_walk(t, o) {
        let pooled = (n * step.f_trusted + m * step.f_observed) / total;
        if pooled == 0.0 || pooled == 1.0 {
            continue;
        }
        let diff = step.f_trusted - step.f_observed;
        sum += step.multiplicity as f64 * diff * diff / (pooled * (1.0 - pooled));
    }
    n * m / total * sum
}

/// 1-Wasserstein distance: mean |matched order statistics| for equal sizes,
/// otherwise ∫ |F̂_t − F̂_o| over the pooled support.
fn w1_distance(t: &[f64], o: &[f64]) -> f64 {
    if t.len() == o.len() {
        let total: f64 = t.iter().zip(o).map(|(a, b)| (a - b).abs()).sum();
        return total / t.len() as f64;
    }
    let mut integral = 0.0f64;
    let mut previous: Option<(f64, f64)> = None; // (value, |F_t − F_o|)
    for step in merge_walk(t, o) {
        if let Some((value, gap)) = previous {
            integral += gap * (step.value - value);
        }
        previous = Some((step.value, (step.f_trusted - step.f_observed).abs()));
    }
    integral
}

/// Linear-interpolation sample quantile (the common "type 7" rule).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Interquartile range of the trusted sample; the default normalization
/// scale for the unbounded measures. Falls back to 1 when degenerate.
fn default_scale(sorted_trusted: &[f64]) -> f64 {
    let iqr = quantile(sorted_trusted, 0.75) - quantile(sorted_trusted, 0.25);
    if iqr > 0.0 {
        iqr
    } else {
        1.0
    }
}

fn confidence_of(measure: Measure, distance: f64, scale: f64) -> f64 {
    let c = match measure {
        Measure::Ks => 1.0 - distance,
        Measure::Kuiper => 1.0 - distance / 2.0,
        Measure::CramerVonMises | Measure::AndersonDarling | Measure::Wasserstein1 => {
            libm::exp(-distance / scale)
        }
    };
    c.clamp(0.0, 1.0)
}

/// Measure the distance between a trusted and an observed sample and
/// normalize it to a confidence, using the default trusted-IQR scale for the
/// unbounded measures.
pub fn ecdf_distance(
    measure: Measure,
    trusted: &FeatureSample,
    observed: &FeatureSample,
) -> Result<DistanceReport, GateError> {
    ecdf_distance_scaled(measure, trusted, observed, None)
}

/// [`ecdf_distance`] with an explicit normalization scale for the unbounded
/// measures (ignored by KS and Kuiper, which are already in [0, 1]).
pub fn ecdf_distance_scaled(
    measure: Measure,
    trusted: &FeatureSample,
    observed: &FeatureSample,
    scale: Option<f64>,
) -> Result<DistanceReport, GateError> {
    trusted.check_gateable()?;
    observed.check_gateable()?;
    if let Some(s) = scale {
        if !s.is_finite() || s <= 0.0 {
            return Err(GateError::InvalidScale(s));
        }
    }
    let t = trusted.sorted();
    let o = observed.sorted();
    let value = match measure {
        Measure::Ks => ks_distance(&t, &o),
        Measure::Kuiper => kuiper_distance(&t, &o),
        Measure::CramerVonMises => cvm_distance(&t, &o),
        Measure::AndersonDarling => ad_distance(&t, &o),
        Measure::Wasserstein1 => w1_distance(&t, &o),
    };
    let scale = scale.unwrap_or_else(|| default_scale(&t));
    Ok(DistanceReport {
        measure,
        value,
        confidence: confidence_of(measure, value, scale),
    })
}

/// Partition a confidence into the three-way action. Boundaries are closed
/// on the higher-confidence side: `c ≥ tau_high` proceeds, `c ≥ tau_low`
/// recaptures, anything lower goes to manual inspection.
pub fn decide(confidence: f64, thresholds: GateThresholds) -> Result<GateDecision, GateError> {
    thresholds.validate()?;
    if !(0.0..=1.0).contains(&confidence) || !confidence.is_finite() {
        return Err(GateError::InvalidConfidence(confidence));
    }
    let action = if confidence >= thresholds.tau_high {
        GateAction::Proceed
    } else if confidence >= thresholds.tau_low {
        GateAction::Recapture
    } else {
        GateAction::ManualInspection
    };
    Ok(GateDecision {
        action,
        confidence,
        measure: None,
    })
}

/// Distance, confidence, and decision for one observed sample.
pub fn evaluate_gate(
    measure: Measure,
    trusted: &FeatureSample,
    observed: &FeatureSample,
    thresholds: GateThresholds,
) -> Result<(DistanceReport, GateDecision), GateError> {
    let report = ecdf_distance(measure, trusted, observed)?;
    let mut decision = decide(report.confidence, thresholds)?;
    decision.measure = Some(measure);
    Ok((report, decision))
}

/// Gate several feature channels at once, combining by minimum confidence —
/// the most conservative channel decides.
pub fn evaluate_gate_channels(
    measure: Measure,
    channels: &[(&FeatureSample, &FeatureSample)],
    thresholds: GateThresholds,
) -> Result<(Vec<DistanceReport>, GateDecision), GateError> {
    if channels.is_empty() {
        return Err(GateError::NoChannels);
    }
    let mut reports = Vec::with_capacity(channels.len());
    for (trusted, observed) in channels {
        reports.push(ecdf_distance(measure, trusted, observed)?);
    }
    let min_confidence = reports
        .iter()
        .map(|r| r.confidence)
        .fold(f64::INFINITY, f64::min);
    let mut decision = decide(min_confidence, thresholds)?;
    decision.measure = Some(measure);
    Ok((reports, decision))
}
