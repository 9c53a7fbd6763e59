//! Shared helpers for the integration suites: the calibrated blade fixture
//! and a seeded random-model generator for oracle-equivalence testing.
#![allow(dead_code)]

use windrisk_core::bn::EvidenceAssignment;
use windrisk_core::ftree::{parse_model, BasicEvent, FaultTree, Gate, GateKind};
use windrisk_core::sim::SplitMix64;

/// Parse the calibrated blade fixture shipped with the workspace.
pub fn blade_model() -> FaultTree {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/blade.ft");
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read blade fixture at {path}: {e}"));
    parse_model(&text).unwrap_or_else(|d| panic!("blade fixture failed validation: {d:?}"))
}

/// A random valid model: 2–16 events with uniform priors and 1–6 AND/OR
/// gates wired only to already-declared nodes, so the result is acyclic by
/// construction. Shared inputs (DAG shape) arise naturally. The final gate
/// is the top node.
pub fn random_tree(rng: &mut SplitMix64) -> FaultTree {
    let n_events = 2 + (rng.next_u64() % 15) as usize;
    let events: Vec<BasicEvent> = (1..=n_events)
        .map(|i| BasicEvent {
            id: format!("x{i}"),
            name: format!("event {i}"),
            prior: rng.next_f64(),
        })
        .collect();

    let n_gates = 1 + (rng.next_u64() % 6) as usize;
    let mut pool: Vec<String> = events.iter().map(|e| e.id.clone()).collect();
    let mut gates = Vec::with_capacity(n_gates);
    for g in 1..=n_gates {
        let kind = if rng.next_u64() & 1 == 0 {
            GateKind::And
        } else {
            GateKind::Or
        };
        let arity = (2 + rng.next_u64() % 3) as usize;
        let mut indices: Vec<usize> = (0..pool.len()).collect();
        let take = arity.min(indices.len());
        for i in 0..take {
            let j = i + (rng.next_u64() as usize) % (indices.len() - i);
            indices.swap(i, j);
        }
        let inputs: Vec<String> = indices[..take].iter().map(|&i| pool[i].clone()).collect();
        let id = format!("g{g}");
        pool.push(id.clone());
        gates.push(Gate { id, kind, inputs });
    }

    let top = gates.last().expect("at least one gate").id.clone();
    FaultTree { events, gates, top }
}

/// A random hard-evidence subset: each event is pinned with probability 1/4.
pub fn random_evidence(rng: &mut SplitMix64, ft: &FaultTree) -> EvidenceAssignment {
    let mut ev = EvidenceAssignment::new();
    for event in &ft.events {
        let r = rng.next_u64();
        if r.is_multiple_of(4) {
            ev.set(&event.id, (r >> 8) & 1 == 1);
        }
    }
    ev
}
