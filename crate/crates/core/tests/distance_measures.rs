//! Closed-form pins and invariance properties for the two-sample ECDF
//! distance measures and the three-way confidence gate.

use windrisk_core::gate::{
    decide, ecdf_distance, ecdf_distance_scaled, evaluate_gate, evaluate_gate_channels,
    FeatureSample, GateAction, GateError, GateThresholds, Measure, MIN_GATED_SAMPLE,
};

fn sample(label: &str, values: &[f64]) -> FeatureSample {
    FeatureSample::new(label, values.to_vec()).unwrap()
}

/// n equally spaced points starting at `offset`.
fn ramp(n: usize, offset: f64) -> FeatureSample {
    sample("ramp", &(0..n).map(|i| offset + i as f64).collect::<Vec<_>>())
}

fn distance(measure: Measure, t: &FeatureSample, o: &FeatureSample) -> f64 {
    ecdf_distance(measure, t, o).unwrap().value
}

#[test]
fn interleaved_shift_has_dyadic_closed_forms() {
    // t = {1..8}, o = t + 0.5: the pooled walk alternates a 1/8 gap with a
    // zero gap, giving exactly representable distances.
    let t = ramp(8, 1.0);
    let o = ramp(8, 1.5);
    assert_eq!(distance(Measure::Ks, &t, &o), 0.125);
    // One-sided displacement: the other Kuiper arm is zero.
    assert_eq!(distance(Measure::Kuiper, &t, &o), 0.125);
    // T = nm/(n+m)^2 · Σ c_k (F1−F2)^2 = (64/256) · 8 · (1/64) = 1/32.
    assert_eq!(distance(Measure::CramerVonMises, &t, &o), 0.03125);
    // Matched order statistics: every pair differs by exactly 0.5.
    assert_eq!(distance(Measure::Wasserstein1, &t, &o), 0.5);
    // A² = (nm/N) Σ c_k (F1−F2)² / (H(1−H)) over the eight odd pooled ranks.
    let expected_ad =
        16.0 * (2.0 * (1.0 / 15.0 + 1.0 / 39.0 + 1.0 / 55.0 + 1.0 / 63.0));
    let ad = distance(Measure::AndersonDarling, &t, &o);
    assert!((ad - expected_ad).abs() < 1e-12, "AD {ad} vs {expected_ad}");
}

#[test]
fn identical_distributions_have_zero_distance_and_full_confidence() {
    let t = ramp(8, 0.0);
    // Same distribution, different sample size: each point duplicated.
    let doubled: Vec<f64> = t.values().iter().flat_map(|&v| [v, v]).collect();
    let o = sample("doubled", &doubled);
    for measure in Measure::ALL {
        let report = ecdf_distance(measure, &t, &o).unwrap();
        assert_eq!(report.value, 0.0, "{measure}: ECDFs are identical");
        assert_eq!(report.confidence, 1.0, "{measure}");
    }
}

#[test]
fn disjoint_supports_saturate_the_bounded_measures() {
    let t = ramp(10, 0.0);
    let o = ramp(10, 1000.0);
    assert_eq!(distance(Measure::Ks, &t, &o), 1.0);
    assert_eq!(distance(Measure::Kuiper, &t, &o), 1.0);
    // Kuiper confidence is 1 − V/2, keeping it in [0, 1].
    let kuiper = ecdf_distance(Measure::Kuiper, &t, &o).unwrap();
    assert_eq!(kuiper.confidence, 0.5);
    let ks = ecdf_distance(Measure::Ks, &t, &o).unwrap();
    assert_eq!(ks.confidence, 0.0);
}

#[test]
fn wasserstein_integral_handles_unequal_sizes_exactly() {
    // t = {0..7}; o = nine copies of 100. The ECDF area between them is
    // Σ k/8 over [0,7) plus 93 of full disagreement = 96.5, and every term
    // is dyadic, so the merge-walk integral is exact.
    let t = ramp(8, 0.0);
    let o = sample("point-mass", &[100.0; 9]);
    assert_eq!(distance(Measure::Wasserstein1, &t, &o), 96.5);
    // Equal-size matched order statistics agree with the integral.
    let o8 = sample("point-mass", &[100.0; 8]);
    assert_eq!(distance(Measure::Wasserstein1, &t, &o8), 96.5);
}

#[test]
fn rank_measures_are_invariant_under_monotone_maps() {
    let t = sample("t", &[3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3, 5.8, 9.7, 9.3]);
    let o = sample("o", &[2.0, 7.0, 1.8, 2.8, 1.2, 8.2, 8.3, 4.6, 4.7, 3.1]);
    let map = |s: &FeatureSample| {
        sample(
            "mapped",
            &s.values().iter().map(|&v| v.exp()).collect::<Vec<_>>(),
        )
    };
    let (tm, om) = (map(&t), map(&o));
    for measure in [
        Measure::Ks,
        Measure::Kuiper,
        Measure::CramerVonMises,
        Measure::AndersonDarling,
    ] {
        let before = distance(measure, &t, &o);
        let after = distance(measure, &tm, &om);
        assert_eq!(
            before.to_bits(),
            after.to_bits(),
            "{measure} depends only on ranks"
        );
    }
}

#[test]
fn wasserstein_is_positively_homogeneous() {
    // Doubling is exact in floating point, so W1 doubles bitwise.
    let t = sample("t", &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
    let o = sample("o", &[2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0]);
    let scale2 = |s: &FeatureSample| {
        sample(
            "x2",
            &s.values().iter().map(|&v| 2.0 * v).collect::<Vec<_>>(),
        )
    };
    let before = distance(Measure::Wasserstein1, &t, &o);
    let after = distance(Measure::Wasserstein1, &scale2(&t), &scale2(&o));
    assert_eq!(after.to_bits(), (2.0 * before).to_bits());
}

#[test]
fn all_measures_are_symmetric() {
    let a = sample("a", &[1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 1.5, 6.5, 3.3, 0.2]);
    let b = sample("b", &[2.2, 4.4, 6.6, 8.8, 1.1, 3.3, 5.5, 7.7]);
    for measure in Measure::ALL {
        // Raw distances are symmetric; confidence scaling is not (the scale
        // comes from whichever sample is "trusted"), so compare values.
        assert_eq!(
            distance(measure, &a, &b).to_bits(),
            distance(measure, &b, &a).to_bits(),
            "{measure}"
        );
    }
}

#[test]
fn kuiper_dominates_ks() {
    // V = D+ + D− ≥ max(D+, D−) = KS, with equality when one arm is zero.
    let t = sample("t", &[5.0, 1.0, 3.0, 9.0, 7.0, 2.0, 8.0, 4.0]);
    let o = sample("o", &[6.0, 2.5, 3.5, 0.5, 7.5, 9.5, 4.5, 1.5]);
    assert!(distance(Measure::Kuiper, &t, &o) >= distance(Measure::Ks, &t, &o));
}

#[test]
fn confidence_uses_trusted_iqr_and_explicit_scale_wins() {
    // Trusted IQR = 0 (constant sample): the scale falls back to 1.0, so
    // confidence is exactly exp(−distance).
    let constant = sample("flat", &[5.0; 8]);
    let o = sample("o", &[5.5; 8]);
    let report = ecdf_distance(Measure::Wasserstein1, &constant, &o).unwrap();
    assert_eq!(report.value, 0.5);
    assert_eq!(report.confidence.to_bits(), (-0.5f64).exp().to_bits());

    // A wider scale forgives the same distance more.
    let t = ramp(8, 0.0);
    let shifted = ramp(8, 2.0);
    let tight = ecdf_distance_scaled(Measure::Wasserstein1, &t, &shifted, Some(1.0)).unwrap();
    let loose = ecdf_distance_scaled(Measure::Wasserstein1, &t, &shifted, Some(10.0)).unwrap();
    assert_eq!(tight.value, loose.value);
    assert!(loose.confidence > tight.confidence);

    // KS ignores the scale entirely: confidence is 1 − D either way.
    let ks_a = ecdf_distance_scaled(Measure::Ks, &t, &shifted, Some(1.0)).unwrap();
    let ks_b = ecdf_distance_scaled(Measure::Ks, &t, &shifted, Some(10.0)).unwrap();
    assert_eq!(ks_a.confidence.to_bits(), ks_b.confidence.to_bits());

    assert!(matches!(
        ecdf_distance_scaled(Measure::Wasserstein1, &t, &shifted, Some(0.0)),
        Err(GateError::InvalidScale(_))
    ));
}

#[test]
fn sample_construction_and_size_guards() {
    assert!(matches!(
        FeatureSample::new("empty", vec![]),
        Err(GateError::EmptySample { .. })
    ));
    assert!(matches!(
        FeatureSample::new("nan", vec![1.0, f64::NAN]),
        Err(GateError::NonFiniteValue { .. })
    ));
    assert!(matches!(
        FeatureSample::new("inf", vec![1.0, f64::INFINITY]),
        Err(GateError::NonFiniteValue { .. })
    ));
    // Gating needs MIN_GATED_SAMPLE points even though construction allows fewer.
    let small = sample("small", &[1.0; MIN_GATED_SAMPLE - 1]);
    let big = ramp(MIN_GATED_SAMPLE, 0.0);
    assert!(matches!(
        ecdf_distance(Measure::Ks, &small, &big),
        Err(GateError::UndersizedSample { .. })
    ));
    assert!(matches!(
        ecdf_distance(Measure::Ks, &big, &small),
        Err(GateError::UndersizedSample { .. })
    ));
}

#[test]
fn decision_boundaries_close_on_the_confident_side() {
    let thresholds = GateThresholds::default();
    assert_eq!(thresholds.tau_low, 0.6);
    assert_eq!(thresholds.tau_high, 0.9);
    let action = |c: f64| decide(c, thresholds).unwrap().action;
    assert_eq!(action(0.9), GateAction::Proceed);
    assert_eq!(action(0.95), GateAction::Proceed);
    assert_eq!(action(f64::from_bits(0.9f64.to_bits() - 1)), GateAction::Recapture);
    assert_eq!(action(0.6), GateAction::Recapture);
    assert_eq!(action(f64::from_bits(0.6f64.to_bits() - 1)), GateAction::ManualInspection);
    assert_eq!(action(0.0), GateAction::ManualInspection);
    assert_eq!(action(1.0), GateAction::Proceed);
}

#[test]
fn actions_order_from_worst_to_best() {
    assert!(GateAction::ManualInspection < GateAction::Recapture);
    assert!(GateAction::Recapture < GateAction::Proceed);
}

#[test]
fn thresholds_and_confidence_are_validated() {
    assert!(GateThresholds::new(0.6, 0.9).is_ok());
    assert!(matches!(
        GateThresholds::new(0.9, 0.6),
        Err(GateError::InvalidThresholds { .. })
    ));
    assert!(matches!(
        GateThresholds::new(0.5, 0.5),
        Err(GateError::InvalidThresholds { .. })
    ));
    assert!(matches!(
        GateThresholds::new(-0.1, 0.9),
        Err(GateError::InvalidThresholds { .. })
    ));
    assert!(matches!(
        decide(f64::NAN, GateThresholds::default()),
        Err(GateError::InvalidConfidence(_))
    ));
    assert!(matches!(
        decide(1.5, GateThresholds::default()),
        Err(GateError::InvalidConfidence(_))
    ));
}

#[test]
fn gate_evaluation_tags_the_measure() {
    let t = ramp(16, 0.0);
    let o = ramp(16, 0.25);
    let (report, decision) = evaluate_gate(Measure::Ks, &t, &o, GateThresholds::default()).unwrap();
    assert_eq!(report.measure, Measure::Ks);
    assert_eq!(decision.measure, Some(Measure::Ks));
    assert_eq!(decision.confidence.to_bits(), report.confidence.to_bits());
}

#[test]
fn channel_combination_takes_the_minimum_confidence() {
    let t = ramp(16, 0.0);
    let near = ramp(16, 0.25);
    let far = ramp(16, 1000.0);
    let thresholds = GateThresholds::default();
    let (reports, decision) =
        evaluate_gate_channels(Measure::Ks, &[(&t, &near), (&t, &far)], thresholds).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0].confidence > reports[1].confidence);
    assert_eq!(
        decision.confidence.to_bits(),
        reports[1].confidence.to_bits(),
        "the most conservative channel decides"
    );
    assert_eq!(decision.action, GateAction::ManualInspection);
    assert!(matches!(
        evaluate_gate_channels(Measure::Ks, &[], thresholds),
        Err(GateError::NoChannels)
    ));
}

#[test]
fn measure_tokens_round_trip() {
    for measure in Measure::ALL {
        let token = measure.token();
        assert_eq!(token.parse::<Measure>().unwrap(), measure);
        assert_eq!(format!("{measure}"), token);
        // And through serde as well.
        let json = serde_json::to_string(&measure).unwrap();
        assert_eq!(json, format!("\"{token}\""));
        assert_eq!(serde_json::from_str::<Measure>(&json).unwrap(), measure);
    }
    assert!(matches!(
        "kolmogorov".parse::<Measure>(),
        Err(GateError::UnknownMeasure(_))
    ));
}

#[test]
fn evaluation_is_bit_identical_across_repeats() {
    let t = sample("t", &[0.3, 1.7, 2.9, 0.8, 4.1, 3.3, 2.2, 1.1, 0.5, 3.9]);
    let o = sample("o", &[0.4, 1.9, 2.5, 0.9, 4.8, 3.1, 2.7, 1.3]);
    for measure in Measure::ALL {
        let first = ecdf_distance(measure, &t, &o).unwrap();
        for _ in 0..5 {
            let again = ecdf_distance(measure, &t, &o).unwrap();
            assert_eq!(first.value.to_bits(), again.value.to_bits());
            assert_eq!(first.confidence.to_bits(), again.confidence.to_bits());
        }
    }
}
