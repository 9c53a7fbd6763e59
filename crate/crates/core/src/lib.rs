//! Reliability-inference engine for coherent fault-tree models.
//!
//! The crate compiles AND/OR fault trees into binary Bayesian networks and
//! computes exact top-event probabilities under monitoring evidence:
//!
//! - [`ftree`]: the `.ft` model DSL, structural validation, canonical form,
//!   and content fingerprints.
//! - [`bn`]: compilation to a binary network plus two independent exact
//!   inference paths (full enumeration as the oracle, variable elimination
//!   with a min-fill order as the fast path).
//! - [`evidence`]: hard and soft observations, one-shot evidence cases,
//!   append-only sessions, sensitivity sweeps, and percent-change reports.
//! - [`verify`]: regression harness comparing a model against the published
//!   blade-system study this engine reconstructs.
//! - [`gate`]: two-sample ECDF distance measures and the three-way
//!   confidence gate for deciding whether captured data can be trusted.
//! - [`sim`]: a seeded drone-inspection mission simulator that produces
//!   gated observation streams for the evidence layer.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only forwards to dependencies. All computation is deterministic:
//! identical inputs produce bit-identical outputs, independent of platform.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bn;
pub mod evidence;
pub mod fmtnum;
pub mod ftree;
pub mod gate;
pub mod sim;
pub mod verify;

pub use bn::{compile_to_bn, BayesNet, EvidenceAssignment, QueryResult};
pub use evidence::{apply_case, EvidenceCase, Observation, ReliabilityReport, Session};
pub use ftree::{parse_model, FaultTree};
