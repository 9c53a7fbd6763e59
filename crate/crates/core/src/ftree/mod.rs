//! Fault-tree domain types, validation, canonical form, and fingerprints.
//!
//! A fault tree is a single-rooted DAG: basic events carry independent prior
//! probabilities, gates combine inputs with Boolean AND/OR, and `top` names
//! the system-failure node. Events and gates share one id namespace.
//!
//! The concrete syntax lives in [`parse`]; [`canonicalize`] emits the
//! normal form (events in natural id order, gates topologically sorted,
//! shortest round-trip float formatting) whose SHA-256 digest is the model
//! [`ModelFingerprint`].

mod parse;

pub use parse::parse_model;

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;
use core::fmt;

use sha2::{Digest, Sha256};

/// Lowest-level failure cause with an independent prior probability.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BasicEvent {
    pub id: String,
    pub name: String,
    pub prior: f64,
}

/// Boolean combinator applied by a gate to its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GateKind {
    And,
    Or,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
        })
    }
}

/// An n-ary AND/OR gate over events and other gates.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    /// Ordered references to event or gate ids; arity must be at least 2.
    pub inputs: Vec<String>,
}

/// A parsed fault-tree model. Immutable by convention after construction;
/// all engine operations take it by shared reference.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FaultTree {
    pub events: Vec<BasicEvent>,
    pub gates: Vec<Gate>,
    /// Id of the top (system failure) node; may be a gate or a lone event.
    pub top: String,
}

/// Stable content hash of the canonical model text, as lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelFingerprint {
    pub digest: String,
}

impl fmt::Display for ModelFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest)
    }
}

/// Severity of a validation or parse diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One validation or parse finding. `line`/`column` are 1-based and present
/// only for findings tied to source text.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: Option<u32>,
    pub column: Option<u32>,
    /// Id of the event or gate the finding is about, when applicable.
    pub subject: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line: None,
            column: None,
            subject: None,
            message,
        }
    }

    pub fn warning(message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line: None,
            column: None,
            subject: None,
            message,
        }
    }

    pub fn at(mut self, line: u32, column: u32) -> Self {
        self.line = Some(line);
        self.column = Some(column);
        self
    }

    pub fn about(mut self, subject: &str) -> Self {
        self.subject = Some(subject.to_owned());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => f.write_str("error")?,
            Severity::Warning => f.write_str("warning")?,
        }
        if let (Some(line), Some(col)) = (self.line, self.column) {
            write!(f, "[{line}:{col}]")?;
        }
        if let Some(subject) = &self.subject {
            write!(f, " ({subject})")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// True when `diagnostics` contains at least one error-severity finding.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Natural id ordering: runs of digits compare numerically, everything else
/// byte-wise, so `BE2 < BE14`. This is the canonical ordering for events in
/// canonical form and for report columns.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ab, mut bb) = (a.as_bytes(), b.as_bytes());
    loop {
        match (ab.first(), bb.first()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(&x), Some(&y)) => {
                if x.is_ascii_digit() && y.is_ascii_digit() {
                    let an = split_digits(ab);
                    let bn = split_digits(bb);
                    let trimmed_a = trim_leading_zeros(an.0);
                    let trimmed_b = trim_leading_zeros(bn.0);
                    let ord = trimmed_a
                        .len()
                        .cmp(&trimmed_b.len())
                        .then_with(|| trimmed_a.cmp(trimmed_b));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    ab = an.1;
                    bb = bn.1;
                } else {
                    if x != y {
                        return x.cmp(&y);
                    }
                    ab = &ab[1..];
                    bb = &bb[1..];
                }
            }
        }
    }
}

fn split_digits(s: &[u8]) -> (&[u8], &[u8]) {
    let end = s.iter().position(|b| !b.is_ascii_digit()).unwrap_or(s.len());
    s.split_at(end)
}

fn trim_leading_zeros(s: &[u8]) -> &[u8] {
    let start = s.iter().position(|&b| b != b'0').unwrap_or(s.len());
    &s[start..]
}

/// Wrapper giving `String` the natural ordering for use in sorted containers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalKey(pub String);

impl Ord for NaturalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for NaturalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FaultTree {
    pub fn event(&self, id: &str) -> Option<&BasicEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    pub fn is_event(&self, id: &str) -> bool {
        self.event(id).is_some()
    }

    /// Structural equality: id-keyed comparison that ignores declaration
    /// order of events and gates but preserves gate input order.
    pub fn structurally_equal(&self, other: &FaultTree) -> bool {
        if self.top != other.top
            || self.events.len() != other.events.len()
            || self.gates.len() != other.gates.len()
        {
            return false;
        }
        let events_by_id = |t: &FaultTree| -> BTreeMap<String, (String, f64)> {
            t.events
                .iter()
                .map(|e| (e.id.clone(), (e.name.clone(), e.prior)))
                .collect()
        };
        let gates_by_id = |t: &FaultTree| -> BTreeMap<String, (GateKind, Vec<String>)> {
            t.gates
                .iter()
                .map(|g| (g.id.clone(), (g.kind, g.inputs.clone())))
                .collect()
        };
        events_by_id(self) == events_by_id(other) && gates_by_id(self) == gates_by_id(other)
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains(|c: char| c.is_whitespace() || c == '"' || c == '#')
}

/// Check every structural invariant. Returns an empty list iff the model is
/// valid; warnings (e.g. unreachable definitions) do not block acceptance.
pub fn validate(ft: &FaultTree) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    // Id syntax and namespace collisions.
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let ids = ft
        .events
        .iter()
        .map(|e| e.id.as_str())
        .chain(ft.gates.iter().map(|g| g.id.as_str()));
    for id in ids {
        if !valid_id(id) {
            out.push(
                Diagnostic::error(format!(
                    "invalid id {id:?}: ids are nonempty and contain no whitespace, '\"', or '#'"
                ))
                .about(id),
            );
        }
        if !seen.insert(id) {
            out.push(
                Diagnostic::error(format!("duplicate id `{id}` (events and gates share one namespace)"))
                    .about(id),
            );
        }
    }

    for event in &ft.events {
        if !event.prior.is_finite() || !(0.0..=1.0).contains(&event.prior) {
            out.push(
                Diagnostic::error(format!(
                    "prior {} of event `{}` is outside [0, 1]",
                    event.prior, event.id
                ))
                .about(&event.id),
            );
        }
    }

    for gate in &ft.gates {
        if gate.inputs.len() < 2 {
            out.push(
                Diagnostic::error(format!(
                    "gate `{}` has {} input(s); gates need at least 2",
                    gate.id,
                    gate.inputs.len()
                ))
                .about(&gate.id),
            );
        }
        for input in &gate.inputs {
            if !seen.contains(input.as_str()) {
                out.push(
                    Diagnostic::error(format!(
                        "gate `{}` references undefined input `{input}`",
                        gate.id
                    ))
                    .about(&gate.id),
                );
            }
        }
    }

    if ft.top.is_empty() {
        out.push(Diagnostic::error("missing `top` declaration".to_owned()));
    } else if !seen.contains(ft.top.as_str()) {
        out.push(
            Diagnostic::error(format!("`top` references undefined id `{}`", ft.top))
                .about(&ft.top),
        );
    }

    out.extend(cycle_diagnostics(ft));

    // Reachability from top (warnings only).
    if seen.contains(ft.top.as_str()) {
        let reachable = reachable_from_top(ft);
        for event in &ft.events {
            if !reachable.contains(event.id.as_str()) {
                out.push(
                    Diagnostic::warning(format!(
                        "event `{}` is not reachable from `top`",
                        event.id
                    ))
                    .about(&event.id),
                );
            }
        }
        for gate in &ft.gates {
            if !reachable.contains(gate.id.as_str()) {
                out.push(
                    Diagnostic::warning(format!("gate `{}` is not reachable from `top`", gate.id))
                        .about(&gate.id),
                );
            }
        }
    }

    out
}

/// Iterative three-color DFS over gate-to-gate edges; events are leaves and
/// cannot participate in cycles.
fn cycle_diagnostics(ft: &FaultTree) -> Vec<Diagnostic> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let gates: BTreeMap<&str, &Gate> = ft.gates.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut color: BTreeMap<&str, Color> =
        gates.keys().map(|&id| (id, Color::White)).collect();
    let mut in_cycle: BTreeSet<&str> = BTreeSet::new();

    for &start in gates.keys() {
        if color[start] != Color::White {
            continue;
        }
        // Stack entries: (gate id, next input index to visit).
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        color.insert(start, Color::Grey);
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let gate = gates[id];
            if *next >= gate.inputs.len() {
                color.insert(id, Color::Black);
                stack.pop();
                continue;
            }
            let input = gate.inputs[*next].as_str();
            *next += 1;
            if let Some((&child, _)) = gates.get_key_value(input) {
                match color[child] {
                    Color::White => {
                        color.insert(child, Color::Grey);
                        stack.push((child, 0));
                    }
                    Color::Grey => {
                        in_cycle.insert(child);
                    }
                    Color::Black => {}
                }
            }
        }
    }

    in_cycle
        .into_iter()
        .map(|id| {
            Diagnostic::error(format!("gate `{id}` participates in a cycle")).about(id)
        })
        .collect()
}

fn reachable_from_top(ft: &FaultTree) -> BTreeSet<&str> {
    let gates: BTreeMap<&str, &Gate> = ft.gates.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut reachable: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = Vec::new();
    if let Some((id, _)) = gates.get_key_value(ft.top.as_str()) {
        stack.push(id);
    } else if ft.events.iter().any(|e| e.id == ft.top) {
        if let Some(event) = ft.event(&ft.top) {
            reachable.insert(event.id.as_str());
        }
    }
    while let Some(id) = stack.pop() {
        if !reachable.insert(id) {
            continue;
        }
        if let Some(gate) = gates.get(id) {
            for input in &gate.inputs {
                stack.push(input.as_str());
            }
        }
    }
    reachable
}

/// Gates in dependency order (inputs before users), deterministic via
/// natural id order among simultaneously ready gates. Pre: no cycles.
pub(crate) fn topological_gates(ft: &FaultTree) -> Vec<&Gate> {
    let gates: BTreeMap<&str, &Gate> = ft.gates.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut unmet: BTreeMap<&str, usize> = BTreeMap::new();
    let mut users: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for gate in &ft.gates {
        let gate_inputs = gate
            .inputs
            .iter()
            .filter(|input| gates.contains_key(input.as_str()))
            .count();
        unmet.insert(gate.id.as_str(), gate_inputs);
        for input in &gate.inputs {
            if gates.contains_key(input.as_str()) {
                users.entry(input.as_str()).or_default().push(gate.id.as_str());
            }
        }
    }
    let mut ready: BTreeSet<NaturalKey> = unmet
        .iter()
        .filter(|(_, &n)| n == 0)
        .map(|(&id, _)| NaturalKey(id.to_owned()))
        .collect();
    let mut out = Vec::with_capacity(ft.gates.len());
    while let Some(key) = ready.iter().next().cloned() {
        ready.remove(&key);
        let id = key.0.as_str();
        out.push(gates[id]);
        for &user in users.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            let n = unmet.get_mut(user).expect("user tracked");
            *n -= 1;
            if *n == 0 {
                ready.insert(NaturalKey(user.to_owned()));
            }
        }
    }
    out
}

/// Emit the canonical text form: events in natural id order, gates
/// topologically sorted, floats in shortest round-trip notation. Fails on
/// any error-severity diagnostic.
pub fn canonicalize(ft: &FaultTree) -> Result<String, Vec<Diagnostic>> {
    let errors: Vec<Diagnostic> = validate(ft).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut events: Vec<&BasicEvent> = ft.events.iter().collect();
    events.sort_by(|a, b| natural_cmp(&a.id, &b.id));

    let mut out = String::new();
    for event in events {
        out.push_str(&format!(
            "event {} \"{}\" p={}\n",
            event.id, event.name, event.prior
        ));
    }
    for gate in topological_gates(ft) {
        out.push_str(&format!("gate {} {}", gate.id, gate.kind));
        for input in &gate.inputs {
            out.push(' ');
            out.push_str(input);
        }
        out.push('\n');
    }
    out.push_str(&format!("top {}\n", ft.top));
    Ok(out)
}

/// SHA-256 of the canonical form, lowercase hex. Identical canonical models
/// produce identical digests.
pub fn fingerprint(ft: &FaultTree) -> Result<ModelFingerprint, Vec<Diagnostic>> {
    let canonical = canonicalize(ft)?;
    let hash = Sha256::digest(canonical.as_bytes());
    let mut digest = String::with_capacity(64);
    for byte in hash {
        digest.push(char::from_digit((byte >> 4) as u32, 16).expect("nibble"));
        digest.push(char::from_digit((byte & 0xf) as u32, 16).expect("nibble"));
    }
    Ok(ModelFingerprint { digest })
}
