//! Binary Bayesian networks compiled from fault trees, with two exact
//! inference paths.
//!
//! Roots carry the event priors as `[1-p, p]` tables; every gate becomes a
//! deterministic node whose CPT holds only 0/1 entries derived from its
//! Boolean function. [`enumerate_probability`] is the oracle: it sums the
//! joint over all root assignments and is deliberately naive.
//! [`eliminate_probability`] is the fast path: factor products summed out in
//! a greedy min-fill order (ties broken by lexicographic node id, so factor
//! schedules are reproducible). Both paths are pure and deterministic;
//! repeated queries return bit-identical results.
//!
//! Deterministic rows stay ordinary factors; hard evidence is applied by
//! reducing factor scopes, and a zero-probability evidence state surfaces as
//! the recoverable [`BnError::ContradictoryEvidence`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::vec;
use core::time::Duration;

use crate::ftree::{validate, Diagnostic, FaultTree, GateKind, NaturalKey};

/// Maximum root count accepted by the enumeration oracle.
pub const MAX_ENUMERATION_ROOTS: usize = 24;
/// Maximum partition size accepted by [`total_probability_check`].
pub const MAX_PARTITION_ROOTS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Root { prior: f64 },
    Gate { kind: GateKind, parents: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

/// Compiled binary network. Nodes are stored roots-first (natural id order)
/// followed by gates in dependency order, so a single forward pass evaluates
/// every gate. Immutable after compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    nodes: Vec<Node>,
    top: usize,
    index: BTreeMap<String, usize>,
}

/// Hard evidence: a set of root nodes pinned to a state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvidenceAssignment {
    entries: BTreeMap<String, bool>,
}

impl EvidenceAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pin `id` to `value`, replacing any previous entry for the same id.
    pub fn set(&mut self, id: &str, value: bool) -> &mut Self {
        self.entries.insert(String::from(id), value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.entries.iter().map(|(id, &value)| (id.as_str(), value))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, bool)> for EvidenceAssignment {
    fn from_iter<T: IntoIterator<Item = (S, bool)>>(iter: T) -> Self {
        EvidenceAssignment {
            entries: iter.into_iter().map(|(id, value)| (id.into(), value)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InferenceMethod {
    Enumeration,
    Elimination,
}

/// Result of one posterior query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// P(top = True | evidence), in [0, 1].
    pub probability: f64,
    pub method: InferenceMethod,
    /// Wall time of the query. Inference itself has no clock; this is zero
    /// unless a caller with a clock fills it in.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BnError {
    #[error("model has {count} root nodes; enumeration supports at most {max}")]
    TooManyRoots { count: usize, max: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("target `{0}` is not a root node")]
    NotARoot(String),
    #[error("evidence has zero probability (contradictory observations)")]
    ContradictoryEvidence,
    #[error("partition has {count} roots; the audit supports at most {max}")]
    TooManyPartitionRoots { count: usize, max: usize },
    #[error("duplicate partition root `{0}`")]
    DuplicatePartitionRoot(String),
}

/// Compile a validated fault tree into a binary network: one root per basic
/// event, one deterministic node per gate, node count preserved exactly.
pub fn compile_to_bn(ft: &FaultTree) -> Result<BayesNet, Vec<Diagnostic>> {
    let errors: Vec<Diagnostic> = validate(ft).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(ft.events.len() + ft.gates.len());
    let mut index: BTreeMap<String, usize> = BTreeMap::new();

    let mut event_ids: Vec<&str> = ft.events.iter().map(|e| e.id.as_str()).collect();
    event_ids.sort_by(|a, b| crate::ftree::natural_cmp(a, b));
    for id in event_ids {
        let event = ft.event(id).expect("sorted from the same collection");
        index.insert(event.id.clone(), nodes.len());
        nodes.push(Node {
            id: event.id.clone(),
            kind: NodeKind::Root { prior: event.prior },
        });
    }

    for gate in crate::ftree::topological_gates(ft) {
        let parents = gate
            .inputs
            .iter()
            .map(|input| *index.get(input).expect("validated reference"))
            .collect();
        index.insert(gate.id.clone(), nodes.len());
        nodes.push(Node {
            id: gate.id.clone(),
            kind: NodeKind::Gate {
                kind: gate.kind,
                parents,
            },
        });
    }

    let top = *index.get(&ft.top).expect("validated top");
    Ok(BayesNet { nodes, top, index })
}

impl BayesNet {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn top_id(&self) -> &str {
        &self.nodes[self.top].id
    }

    pub fn root_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Root { .. }))
            .count()
    }

    /// Root ids in node order (natural id order).
    pub fn root_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().filter_map(|n| match n.kind {
            NodeKind::Root { .. } => Some(n.id.as_str()),
            NodeKind::Gate { .. } => None,
        })
    }

    pub fn prior(&self, id: &str) -> Option<f64> {
        match self.nodes[self.node_index(id)?].kind {
            NodeKind::Root { prior } => Some(prior),
            NodeKind::Gate { .. } => None,
        }
    }

    /// A copy of the network with one root's prior replaced.
    pub fn with_root_prior(&self, id: &str, prior: f64) -> Result<BayesNet, BnError> {
        let idx = self
            .node_index(id)
            .ok_or_else(|| BnError::UnknownNode(String::from(id)))?;
        let mut copy = self.clone();
        match &mut copy.nodes[idx].kind {
            NodeKind::Root { prior: p } => *p = prior,
            NodeKind::Gate { .. } => return Err(BnError::NotARoot(String::from(id))),
        }
        Ok(copy)
    }

    /// Resolve evidence ids to node indices, rejecting unknown or non-root
    /// targets.
    fn resolve_evidence(&self, ev: &EvidenceAssignment) -> Result<Vec<(usize, bool)>, BnError> {
        let mut resolved = Vec::with_capacity(ev.len());
        for (id, value) in ev.iter() {
            let idx = self
                .node_index(id)
                .ok_or_else(|| BnError::UnknownNode(String::from(id)))?;
            match self.nodes[idx].kind {
                NodeKind::Root { .. } => resolved.push((idx, value)),
                NodeKind::Gate { .. } => return Err(BnError::NotARoot(String::from(id))),
            }
        }
        Ok(resolved)
    }
}

/// Exact P(top | ev) by summing the joint over every root assignment
/// consistent with the evidence. The oracle path: no factor algebra, no
/// shortcuts, at most [`MAX_ENUMERATION_ROOTS`] roots.
pub fn enumerate_probability(
    bn: &BayesNet,
    ev: &EvidenceAssignment,
) -> Result<QueryResult, BnError> {
    let roots: Vec<usize> = bn
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| matches!(n.kind, NodeKind::Root { .. }).then_some(i))
        .collect();
    if roots.len() > MAX_ENUMERATION_ROOTS {
        return Err(BnError::TooManyRoots {
            count: roots.len(),
            max: MAX_ENUMERATION_ROOTS,
        });
    }
    let pinned: BTreeMap<usize, bool> = bn.resolve_evidence(ev)?.into_iter().collect();
    let free: Vec<usize> = roots
        .iter()
        .copied()
        .filter(|i| !pinned.contains_key(i))
        .collect();

    let mut numerator = 0.0f64;
    let mut denominator = 0.0f64;
    let mut values = vec![false; bn.nodes.len()];

    for mask in 0u64..(1u64 << free.len()) {
        for (bit, &idx) in free.iter().enumerate() {
            values[idx] = (mask >> bit) & 1 == 1;
        }
        for (&idx, &value) in &pinned {
            values[idx] = value;
        }
        let mut weight = 1.0f64;
        for &idx in &roots {
            let NodeKind::Root { prior } = bn.nodes[idx].kind else {
                unreachable!()
            };
            weight *= if values[idx] { prior } else { 1.0 - prior };
        }
        // Gates are stored after all of their parents.
        for (idx, node) in bn.nodes.iter().enumerate() {
            if let NodeKind::Gate { kind, parents } = &node.kind {
                values[idx] = match kind {
                    GateKind::And => parents.iter().all(|&p| values[p]),
                    GateKind::Or => parents.iter().any(|&p| values[p]),
                };
            }
        }
        denominator += weight;
        if values[bn.top] {
            numerator += weight;
        }
    }

    if denominator == 0.0 {
        return Err(BnError::ContradictoryEvidence);
    }
    Ok(QueryResult {
        probability: numerator / denominator,
        method: InferenceMethod::Enumeration,
        elapsed: Duration::ZERO,
    })
}

/// A table over a sorted set of binary variables. Entry order is the binary
/// odometer over `vars`: bit k of the entry index is the state of `vars[k]`.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            table: vec![value],
        }
    }

    fn from_root(var: usize, prior: f64) -> Self {
        Factor {
            vars: vec![var],
            table: vec![1.0 - prior, prior],
        }
    }

    /// Deterministic CPT over `parents ∪ {gate}`; parent duplicates collapse
    /// (Boolean AND/OR are idempotent).
    fn from_gate(gate_var: usize, kind: GateKind, parents: &[usize]) -> Self {
        let mut vars: Vec<usize> = parents.to_vec();
        vars.push(gate_var);
        vars.sort_unstable();
        vars.dedup();
        let gate_pos = vars.binary_search(&gate_var).expect("gate in scope");
        let mut table = vec![0.0; 1 << vars.len()];
        for (entry, slot) in table.iter_mut().enumerate() {
            let state = |var: usize| -> bool {
                let pos = vars.binary_search(&var).expect("var in scope");
                (entry >> pos) & 1 == 1
            };
            let out = match kind {
                GateKind::And => parents.iter().all(|&p| state(p)),
                GateKind::Or => parents.iter().any(|&p| state(p)),
            };
            if ((entry >> gate_pos) & 1 == 1) == out {
                *slot = 1.0;
            }
        }
        Factor { vars, table }
    }

    fn contains(&self, var: usize) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    /// Restrict to `var = value`, dropping `var` from scope.
    fn reduce(&self, var: usize, value: bool) -> Factor {
        let pos = self.vars.binary_search(&var).expect("var in scope");
        let vars: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let mut table = vec![0.0; 1 << vars.len()];
        let low_mask = (1usize << pos) - 1;
        for (new_entry, slot) in table.iter_mut().enumerate() {
            let old_entry = (new_entry & low_mask)
                | (usize::from(value) << pos)
                | ((new_entry & !low_mask) << 1);
            *slot = self.table[old_entry];
        }
        Factor { vars, table }
    }

    fn multiply(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let stride = |f: &Factor| -> Vec<usize> {
            vars.iter()
                .map(|v| match f.vars.binary_search(v) {
                    Ok(pos) => 1usize << pos,
                    Err(_) => 0,
                })
                .collect()
        };
        let stride_a = stride(self);
        let stride_b = stride(other);
        let mut table = vec![0.0; 1 << vars.len()];
        for (entry, slot) in table.iter_mut().enumerate() {
            let mut ia = 0usize;
            let mut ib = 0usize;
            for bit in 0..vars.len() {
                if (entry >> bit) & 1 == 1 {
                    ia += stride_a[bit];
                    ib += stride_b[bit];
                }
            }
            *slot = self.table[ia] * other.table[ib];
        }
        Factor { vars, table }
    }

    /// Marginalize `var` out of the table.
    fn sum_out(&self, var: usize) -> Factor {
        let pos = self.vars.binary_search(&var).expect("var in scope");
        let vars: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let mut table = vec![0.0; 1 << vars.len()];
        let low_mask = (1usize << pos) - 1;
        for (new_entry, slot) in table.iter_mut().enumerate() {
            let base = (new_entry & low_mask) | ((new_entry & !low_mask) << 1);
            *slot = self.table[base] + self.table[base | (1usize << pos)];
        }
        Factor { vars, table }
    }
}

/// Greedy min-fill elimination order over the factor interaction graph.
/// Ties break by lexicographic node id so schedules are reproducible.
fn min_fill_order(bn: &BayesNet, scopes: &[Vec<usize>], keep: Option<usize>) -> Vec<usize> {
    let mut adjacency: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for scope in scopes {
        for &a in scope {
            adjacency.entry(a).or_default();
            for &b in scope {
                if a != b {
                    adjacency.entry(a).or_default().insert(b);
                }
            }
        }
    }
    let mut remaining: BTreeSet<usize> = adjacency.keys().copied().collect();
    if let Some(top) = keep {
        remaining.remove(&top);
    }

    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize)> = None; // (fill count, var)
        for &candidate in &remaining {
            let neighbors: Vec<usize> = adjacency[&candidate]
                .iter()
                .copied()
                .filter(|n| remaining.contains(n) || Some(*n) == keep)
                .collect();
            let mut fill = 0usize;
            for (i, &a) in neighbors.iter().enumerate() {
                for &b in &neighbors[i + 1..] {
                    if !adjacency[&a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            let better = match best {
                None => true,
                Some((best_fill, best_var)) => {
                    fill < best_fill
                        || (fill == best_fill
                            && bn.nodes[candidate].id < bn.nodes[best_var].id)
                }
            };
            if better {
                best = Some((fill, candidate));
            }
        }
        let (_, var) = best.expect("remaining is non-empty");
        let neighbors: Vec<usize> = adjacency[&var]
            .iter()
            .copied()
            .filter(|n| remaining.contains(n) || Some(*n) == keep)
            .collect();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adjacency.get_mut(&a).expect("tracked").insert(b);
                adjacency.get_mut(&b).expect("tracked").insert(a);
            }
        }
        remaining.remove(&var);
        order.push(var);
    }
    order
}

/// Exact P(top | ev) by variable elimination. Matches the enumeration oracle
/// within 1e-12 on any model; no root-count guard.
pub fn eliminate_probability(
    bn: &BayesNet,
    ev: &EvidenceAssignment,
) -> Result<QueryResult, BnError> {
    let pinned: BTreeMap<usize, bool> = bn.resolve_evidence(ev)?.into_iter().collect();

    // Barren-node pruning: a node that is neither queried, observed, nor an
    // ancestor of either marginalizes to exactly 1, so its factor is never
    // built. Beyond speed, this keeps the arithmetic of the answer a pure
    // function of the relevant subgraph — sweeping an irrelevant root is
    // bitwise constant instead of constant up to round-off.
    let mut needed = vec![false; bn.nodes.len()];
    let mut stack: Vec<usize> = pinned.keys().copied().collect();
    stack.push(bn.top);
    while let Some(idx) = stack.pop() {
        if needed[idx] {
            continue;
        }
        needed[idx] = true;
        if let NodeKind::Gate { parents, .. } = &bn.nodes[idx].kind {
            stack.extend(parents.iter().copied());
        }
    }

    let mut factors: Vec<Factor> = Vec::with_capacity(bn.nodes.len());
    for (idx, node) in bn.nodes.iter().enumerate() {
        if !needed[idx] {
            continue;
        }
        factors.push(match &node.kind {
            NodeKind::Root { prior } => Factor::from_root(idx, *prior),
            NodeKind::Gate { kind, parents } => Factor::from_gate(idx, *kind, parents),
        });
    }
    for (&var, &value) in &pinned {
        for factor in &mut factors {
            if factor.contains(var) {
                *factor = factor.reduce(var, value);
            }
        }
    }

    // Zero-variable factors — pinned-root weights and fully-summed-out
    // components — multiply the numerator and denominator of the conditional
    // identically, so they cancel from the ratio. Dividing them out only in
    // exact arithmetic (by never multiplying them in) keeps structurally
    // equal queries bitwise equal; their only observable effect is whether
    // the evidence mass is zero.
    let mut scalar_mass = 1.0f64;
    let mut scoped: Vec<Factor> = Vec::with_capacity(factors.len());
    for factor in factors {
        if factor.vars.is_empty() {
            scalar_mass *= factor.table[0];
        } else {
            scoped.push(factor);
        }
    }
    let mut factors = scoped;

    let top_pinned = pinned.get(&bn.top).copied();
    let keep = if top_pinned.is_none() { Some(bn.top) } else { None };
    let scopes: Vec<Vec<usize>> = factors.iter().map(|f| f.vars.clone()).collect();
    let order = min_fill_order(bn, &scopes, keep);

    for var in order {
        let (with_var, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        let mut product = Factor::scalar(1.0);
        for factor in &with_var {
            product = product.multiply(factor);
        }
        factors = rest;
        let summed = product.sum_out(var);
        if summed.vars.is_empty() {
            scalar_mass *= summed.table[0];
        } else {
            factors.push(summed);
        }
    }

    let mut result = Factor::scalar(1.0);
    for factor in &factors {
        result = result.multiply(factor);
    }
    if scalar_mass == 0.0 {
        return Err(BnError::ContradictoryEvidence);
    }

    let probability = match top_pinned {
        None => {
            debug_assert_eq!(result.vars, vec![bn.top]);
            let conditional_mass = result.table[0] + result.table[1];
            if conditional_mass == 0.0 {
                return Err(BnError::ContradictoryEvidence);
            }
            result.table[1] / conditional_mass
        }
        Some(value) => {
            debug_assert!(result.vars.is_empty());
            // All non-cancelled mass is in `scalar_mass`, already nonzero.
            if value {
                1.0
            } else {
                0.0
            }
        }
    };
    Ok(QueryResult {
        probability,
        method: InferenceMethod::Elimination,
        elapsed: Duration::ZERO,
    })
}

/// Law-of-total-probability audit: |P(top) − Σ_s P(s) · P(top | s)| over all
/// joint states `s` of the given roots. Mathematically zero; numerically
/// tiny. Zero-weight states are skipped (their conditional is undefined).
pub fn total_probability_check(
    bn: &BayesNet,
    partition_roots: &[&str],
) -> Result<f64, BnError> {
    if partition_roots.len() > MAX_PARTITION_ROOTS {
        return Err(BnError::TooManyPartitionRoots {
            count: partition_roots.len(),
            max: MAX_PARTITION_ROOTS,
        });
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut priors = Vec::with_capacity(partition_roots.len());
    for &id in partition_roots {
        if !seen.insert(id) {
            return Err(BnError::DuplicatePartitionRoot(String::from(id)));
        }
        let idx = bn
            .node_index(id)
            .ok_or_else(|| BnError::UnknownNode(String::from(id)))?;
        match bn.nodes[idx].kind {
            NodeKind::Root { prior } => priors.push(prior),
            NodeKind::Gate { .. } => return Err(BnError::NotARoot(String::from(id))),
        }
    }

    let base = eliminate_probability(bn, &EvidenceAssignment::new())?.probability;
    let mut mixture = 0.0f64;
    for mask in 0u32..(1u32 << partition_roots.len()) {
        let mut weight = 1.0f64;
        let mut ev = EvidenceAssignment::new();
        for (bit, (&id, &prior)) in partition_roots.iter().zip(&priors).enumerate() {
            let value = (mask >> bit) & 1 == 1;
            weight *= if value { prior } else { 1.0 - prior };
            ev.set(id, value);
        }
        if weight == 0.0 {
            continue;
        }
        mixture += weight * eliminate_probability(bn, &ev)?.probability;
    }

    let residual = base - mixture;
    Ok(residual.abs())
}

/// Natural-order key helper shared with report layouts.
pub fn natural_key(id: &str) -> NaturalKey {
    NaturalKey(String::from(id))
}
