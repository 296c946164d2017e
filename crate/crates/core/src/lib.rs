//! Legislative corpus engine.
//!
//! The crate turns Akoma Ntoso acts into a property graph of laws, articles
//! and typed references, scores texts with readability metrics tuned for
//! Italian, retrieves the normative landscape of a draft through an HNSW
//! vector index joined with the citation graph, and aggregates temporal
//! analytics over the whole corpus.
//!
//! Module map:
//!
//! * [`corpus`] parses AKN XML, plain-text acts, drafts and corpus manifests.
//! * [`graph`] stores the property graph and answers in-force and citation queries.
//! * [`metrics`] computes readability profiles.
//! * [`vector`] holds the embedding backends and the HNSW index.
//! * [`llm`] is the chat gateway with its templates, mock and guardrail.
//! * [`report`] compares a profile against a set and renders reports.
//! * [`pipeline`] composes the above into landscape and draft analyses.
//! * [`monitor`] exposes time series, degree histograms and dataset export.

pub mod corpus;
pub mod graph;
pub mod llm;
pub mod metrics;
pub mod monitor;
pub mod pipeline;
pub mod report;
pub mod vector;

pub use corpus::{DraftProposal, LawDocument};
pub use graph::{FrozenGraph, GraphStore};
pub use metrics::{PosLexicons, ReadabilityProfile};
pub use pipeline::Engine;
