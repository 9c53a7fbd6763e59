//! The acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`, or on failure). Every
//! tolerance is stated where it is asserted.

mod common;

use std::time::Instant;

use common::{blade_model, random_evidence, random_tree};
use windrisk_core::bn::{
    compile_to_bn, eliminate_probability, enumerate_probability, total_probability_check, BnError,
    EvidenceAssignment,
};
use windrisk_core::evidence::{sweep, ObservabilitySet};
use windrisk_core::fmtnum::format_sci4;
use windrisk_core::gate::{
    decide, ecdf_distance, FeatureSample, GateAction, GateThresholds, Measure,
};
use windrisk_core::sim::{
    mission_to_session, run_mission, AnomalyScenario, MissionPlan, SplitMix64,
};
use windrisk_core::verify::verify_against_published;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} ({name}): {verdict} — {detail}");
    assert!(pass, "acceptance criterion {criterion} ({name}) failed: {detail}");
}

#[test]
fn acceptance_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xACCE97);
    let mut max_diff = 0.0f64;
    let mut queries = 0u32;
    for _ in 0..500 {
        let ft = random_tree(&mut rng);
        let bn = compile_to_bn(&ft).expect("generated models are valid");
        for _ in 0..3 {
            let ev = random_evidence(&mut rng, &ft);
            let slow = enumerate_probability(&bn, &ev);
            let fast = eliminate_probability(&bn, &ev);
            queries += 1;
            match (slow, fast) {
                (Ok(a), Ok(b)) => max_diff = max_diff.max((a.probability - b.probability).abs()),
                (Err(BnError::ContradictoryEvidence), Err(BnError::ContradictoryEvidence)) => {}
                (a, b) => panic!("paths disagree on outcome kind: {a:?} vs {b:?}"),
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = max_diff <= 1e-12 && elapsed.as_secs() < 60;
    report(
        1,
        "oracle equivalence",
        pass,
        &format!("500 models / {queries} queries, max |VE − enum| = {max_diff:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_2_published_baseline() {
    let ft = blade_model();
    let bn = compile_to_bn(&ft).unwrap();
    let baseline = eliminate_probability(&bn, &EvidenceAssignment::new())
        .unwrap()
        .probability;
    let formatted = format_sci4(baseline);
    report(
        2,
        "published baseline",
        formatted == "2.114E-4",
        &format!("baseline {baseline:.12e} formats to {formatted}"),
    );
}

#[test]
fn acceptance_3_binary_case_regression() {
    let ft = blade_model();
    let vr = verify_against_published(&ft).unwrap();
    let residuals_ok = vr.max_hard_rel_residual <= 0.01;
    let plateaus_ok = vr.plateau_false_exact && vr.plateau_true_exact;
    let formatted_ok = vr
        .hard
        .iter()
        .all(|c| c.computed_formatted == format_sci4(c.published));
    let pass = residuals_ok && plateaus_ok && formatted_ok;
    report(
        3,
        "binary-case regression",
        pass,
        &format!(
            "max relative residual {:.3e} (≤ 1e-2), plateaus exact: {}/{}, all 8 format to the published strings: {}",
            vr.max_hard_rel_residual, vr.plateau_false_exact, vr.plateau_true_exact, formatted_ok
        ),
    );
}

#[test]
fn acceptance_4_soft_and_mixed_regression() {
    let ft = blade_model();
    let vr = verify_against_published(&ft).unwrap();
    let pass = vr.max_soft_pct_diff_pp <= 0.15 && vr.max_mixed_pct_diff_pp <= 0.5;
    report(
        4,
        "soft/mixed-case regression",
        pass,
        &format!(
            "max soft Δpct {:.4} pp (≤ 0.15), max mixed Δpct {:.4} pp (≤ 0.5)",
            vr.max_soft_pct_diff_pp, vr.max_mixed_pct_diff_pp
        ),
    );
}

#[test]
fn acceptance_5_self_consistency_audit() {
    let ft = blade_model();
    let vr = verify_against_published(&ft).unwrap();
    let blade_ok = vr.published_mixture_matches_baseline && vr.total_probability_residual <= 1e-12;

    // The engine-side audit must hold on arbitrary models too.
    let mut rng = SplitMix64::new(0x5EEDED);
    let mut worst = vr.total_probability_residual;
    for _ in 0..20 {
        let ft = random_tree(&mut rng);
        let bn = compile_to_bn(&ft).unwrap();
        let k = 1 + (rng.next_u64() % 3) as usize;
        let roots: Vec<&str> = ft.events.iter().take(k).map(|e| e.id.as_str()).collect();
        worst = worst.max(total_probability_check(&bn, &roots).unwrap());
    }
    let pass = blade_ok && worst <= 1e-12;
    report(
        5,
        "self-consistency audit",
        pass,
        &format!(
            "published mixture → {} (matches baseline: {}), worst total-probability residual {:.3e} (≤ 1e-12)",
            vr.published_mixture_formatted, vr.published_mixture_matches_baseline, worst
        ),
    );
}

#[test]
fn acceptance_6_evidence_limit_coherence() {
    let mut rng = SplitMix64::new(0xC0FFEE);
    let mut worst = 0.0f64;
    let mut monotone = true;
    let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    for _ in 0..100 {
        let ft = random_tree(&mut rng);
        let bn = compile_to_bn(&ft).unwrap();
        for event in &ft.events {
            for (prior, value) in [(1.0, true), (0.0, false)] {
                let via_prior = eliminate_probability(
                    &bn.with_root_prior(&event.id, prior).unwrap(),
                    &EvidenceAssignment::new(),
                );
                let mut ev = EvidenceAssignment::new();
                ev.set(&event.id, value);
                let via_hard = eliminate_probability(&bn, &ev);
                match (via_prior, via_hard) {
                    (Ok(a), Ok(b)) => worst = worst.max((a.probability - b.probability).abs()),
                    // Pinning another 0/1-prior root can zero the evidence
                    // mass on both paths at once; that is still agreement.
                    (Err(BnError::ContradictoryEvidence), Err(BnError::ContradictoryEvidence)) => {}
                    (a, b) => panic!("limit paths disagree: {a:?} vs {b:?}"),
                }
            }
            let points = sweep(&ft, &event.id, &grid).unwrap();
            monotone &= points.windows(2).all(|w| w[0].probability <= w[1].probability);
        }
    }
    let pass = worst <= 1e-12 && monotone;
    report(
        6,
        "evidence-limit coherence",
        pass,
        &format!("100 models, every root: max |limit − hard| = {worst:.3e} (≤ 1e-12), sweeps monotone: {monotone}"),
    );
}

#[test]
fn acceptance_7_distance_measures() {
    let mut rng = SplitMix64::new(0xD157);

    let ramp: Vec<f64> = (0..64).map(|i| i as f64 * 0.25).collect();
    let identical = FeatureSample::new("ramp", ramp.clone()).unwrap();
    let ks_identical = ecdf_distance(Measure::Ks, &identical, &identical)
        .unwrap()
        .value;

    let zeros = FeatureSample::new("zeros", vec![0.0; 16]).unwrap();
    let ones = FeatureSample::new("ones", vec![1.0; 16]).unwrap();
    let ks_disjoint = ecdf_distance(Measure::Ks, &zeros, &ones).unwrap().value;

    let uniform: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
    let shifted: Vec<f64> = (0..10_000).map(|_| 0.5 + rng.next_f64()).collect();
    let ks_shift = ecdf_distance(
        Measure::Ks,
        &FeatureSample::new("u01", uniform).unwrap(),
        &FeatureSample::new("u0515", shifted).unwrap(),
    )
    .unwrap()
    .value;

    let base = FeatureSample::new("base", ramp.clone()).unwrap();
    let delta = 0.734;
    let moved =
        FeatureSample::new("moved", ramp.iter().map(|v| v + delta).collect()).unwrap();
    let w1 = ecdf_distance(Measure::Wasserstein1, &base, &moved)
        .unwrap()
        .value;

    let mut kuiper_dominates = true;
    for _ in 0..1000 {
        let n = 8 + (rng.next_u64() % 25) as usize;
        let m = 8 + (rng.next_u64() % 25) as usize;
        let a = FeatureSample::new("a", (0..n).map(|_| rng.next_gaussian()).collect()).unwrap();
        let b = FeatureSample::new(
            "b",
            (0..m).map(|_| 0.3 * rng.next_gaussian() + 0.2).collect(),
        )
        .unwrap();
        let ks = ecdf_distance(Measure::Ks, &a, &b).unwrap().value;
        let kuiper = ecdf_distance(Measure::Kuiper, &a, &b).unwrap().value;
        kuiper_dominates &= kuiper >= ks;
    }

    let pass = ks_identical == 0.0
        && ks_disjoint == 1.0
        && (ks_shift - 0.5).abs() <= 0.03
        && (w1 - delta).abs() <= 1e-12
        && kuiper_dominates;
    report(
        7,
        "distance measures",
        pass,
        &format!(
            "KS(identical) = {ks_identical}, KS(disjoint) = {ks_disjoint}, KS(uniform shift) = {ks_shift:.4} (0.5 ± 0.03), |W1 − δ| = {:.2e} (≤ 1e-12), Kuiper ≥ KS on 1000 pairs: {kuiper_dominates}",
            (w1 - delta).abs()
        ),
    );
}

#[test]
fn acceptance_8_gate_decision_partition() {
    let mut rng = SplitMix64::new(0x6A7E);
    let mut pass = true;
    for _ in 0..50 {
        let tau_low = rng.next_f64() * 0.98;
        let tau_high = tau_low + 0.01 + rng.next_f64() * (0.99 - tau_low);
        let thresholds = GateThresholds::new(tau_low, tau_high).unwrap();

        // Boundaries belong to the higher-confidence action.
        pass &= decide(tau_low, thresholds).unwrap().action == GateAction::Recapture;
        pass &= decide(tau_high, thresholds).unwrap().action == GateAction::Proceed;

        let mut previous = GateAction::ManualInspection;
        for i in 0..=1000u32 {
            let confidence = f64::from(i) / 1000.0;
            let action = decide(confidence, thresholds).unwrap().action;
            let expected = if confidence >= tau_high {
                GateAction::Proceed
            } else if confidence >= tau_low {
                GateAction::Recapture
            } else {
                GateAction::ManualInspection
            };
            pass &= action == expected; // exactly one action, the right one
            pass &= action >= previous; // monotone in confidence
            previous = action;
        }
    }
    report(
        8,
        "gate decision partition",
        pass,
        "grid [0,1] step 0.001 × 50 threshold pairs: unique action, ≥-closed boundaries, monotone",
    );
}

#[test]
fn acceptance_9_end_to_end_loop() {
    let ft = blade_model();
    let observability: ObservabilitySet = ["BE1", "BE2", "BE14"].into_iter().collect();
    let mut trusted_rng = SplitMix64::new(7);
    let trusted = FeatureSample::new(
        "trusted",
        (0..256).map(|_| trusted_rng.next_gaussian()).collect(),
    )
    .unwrap();
    let mut scenario = AnomalyScenario::default();
    scenario.degradations.insert(String::from("BE14"), 1.0);

    let run = || {
        run_mission(
            &MissionPlan::default(),
            &scenario,
            &observability,
            &trusted,
            GateThresholds::default(),
            Measure::Wasserstein1,
            42,
        )
        .unwrap()
    };
    let outcome = run();
    let rerun = run();

    let hard_be14 = outcome.observations.iter().any(|o| {
        o.event == "BE14"
            && matches!(
                o.kind,
                windrisk_core::evidence::ObservationKind::Hard { value: true }
            )
    });
    let timeline = mission_to_session(&ft, observability.clone(), &outcome.observations).unwrap();
    let posterior = timeline.last().map(|r| r.posterior).unwrap_or(f64::NAN);
    let in_bracket = (1.065e-3..=1.077e-3).contains(&posterior);

    let rerun_timeline = mission_to_session(&ft, observability, &rerun.observations).unwrap();
    let bit_identical = outcome == rerun
        && timeline.len() == rerun_timeline.len()
        && timeline
            .iter()
            .zip(&rerun_timeline)
            .all(|(a, b)| a.posterior.to_bits() == b.posterior.to_bits());

    let pass = hard_be14 && in_bracket && bit_identical;
    report(
        9,
        "end-to-end loop",
        pass,
        &format!(
            "Hard(BE14=True) emitted: {hard_be14}, posterior {posterior:.6e} in [1.065E-3, 1.077E-3]: {in_bracket}, seed-42 rerun bit-identical: {bit_identical}"
        ),
    );
}
