//! In-memory property graph of laws and articles.
//!
//! Nodes are keyed by canonical act identifiers; article nodes use the
//! `law_id#art_N` form so an article's parent law is recoverable from its id.
//! Edges are `CONTAINS` (law to article), `CITES` (any unit to any unit,
//! tagged preamble/body) and `ABROGATES` (law to law, dated).
//!
//! Mutation happens on [`GraphStore`]; [`GraphStore::freeze`] turns it into a
//! [`FrozenGraph`] that can be shared across threads and only exposes reads.

mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::uri::law_part;
use crate::corpus::{LawDocument, RefKind};

pub use snapshot::{GraphSnapshot, SNAPSHOT_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node not found: {0}")]
    NodeNotFound(String),
    #[error("node {id} is not a {expected:?} node")]
    KindMismatch { id: String, expected: NodeKind },
    #[error("snapshot format version {found}, expected {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Law,
    Article,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeKind {
    Contains,
    Cites,
    Abrogates,
}

impl std::str::FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CONTAINS" => Ok(EdgeKind::Contains),
            "CITES" => Ok(EdgeKind::Cites),
            "ABROGATES" => Ok(EdgeKind::Abrogates),
            other => Err(format!("unknown edge kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeProps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publication_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ministry_domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_digest: Option<String>,
    /// Article label (`3-bis`); articles only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Cited but not ingested.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stub: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node_id: String,
    pub kind: NodeKind,
    pub properties: NodeProps,
}

impl NodeRecord {
    pub fn is_law(&self) -> bool {
        self.kind == NodeKind::Law
    }

    pub fn is_stub(&self) -> bool {
        self.properties.stub
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeProps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_kind: Option<RefKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specifies_paragraph: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_date: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: String,
    pub dst: String,
    pub kind: EdgeKind,
    pub properties: EdgeProps,
}

/// Edge identity. A unit citing the same target from preamble and body holds
/// two `CITES` edges; everything else has set semantics on (src, dst, kind).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct EdgeKey {
    src: String,
    dst: String,
    kind: EdgeKind,
    ref_kind: Option<RefKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphStore {
    nodes: BTreeMap<String, NodeRecord>,
    edges: BTreeMap<EdgeKey, EdgeProps>,
    outgoing: BTreeMap<String, BTreeSet<EdgeKey>>,
    incoming: BTreeMap<String, BTreeSet<EdgeKey>>,
}

pub(crate) fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash[..16].iter().map(|b| format!("{b:02x}")).collect()
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_count_of(&self, kind: EdgeKind) -> usize {
        self.edges.keys().filter(|k| k.kind == kind).count()
    }

    pub fn node(&self, id: &str) -> Option<&NodeRecord> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values()
    }

    /// All law nodes, stubs included, in id order.
    pub fn laws(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values().filter(|n| n.is_law())
    }

    /// Ingested (non-stub) laws in id order.
    pub fn ingested_laws(&self) -> impl Iterator<Item = &NodeRecord> {
        self.laws().filter(|n| !n.is_stub())
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeRecord> + '_ {
        self.edges.iter().map(|(k, p)| to_record(k, p))
    }

    /// Article nodes of a law, in article order.
    pub fn articles_of(&self, law_id: &str) -> Vec<&NodeRecord> {
        let mut articles: Vec<&NodeRecord> = self
            .out_keys(law_id)
            .filter(|k| k.kind == EdgeKind::Contains)
            .filter_map(|k| self.nodes.get(&k.dst))
            .collect();
        articles.sort_by(|a, b| {
            crate::corpus::compare_article_numbers(
                a.properties.number.as_deref().unwrap_or_default(),
                b.properties.number.as_deref().unwrap_or_default(),
            )
        });
        articles
    }

    fn out_keys<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a EdgeKey> + 'a {
        self.outgoing.get(id).into_iter().flatten()
    }

    fn in_keys<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a EdgeKey> + 'a {
        self.incoming.get(id).into_iter().flatten()
    }

    fn insert_edge(&mut self, key: EdgeKey, props: EdgeProps) {
        self.outgoing.entry(key.src.clone()).or_default().insert(key.clone());
        self.incoming.entry(key.dst.clone()).or_default().insert(key.clone());
        self.edges.insert(key, props);
    }

    fn remove_edge(&mut self, key: &EdgeKey) {
        self.edges.remove(key);
        if let Some(set) = self.outgoing.get_mut(&key.src) {
            set.remove(key);
            if set.is_empty() {
                self.outgoing.remove(&key.src);
            }
        }
        if let Some(set) = self.incoming.get_mut(&key.dst) {
            set.remove(key);
            if set.is_empty() {
                self.incoming.remove(&key.dst);
            }
        }
    }

    fn remove_node(&mut self, id: &str) {
        let keys: Vec<EdgeKey> = self.out_keys(id).chain(self.in_keys(id)).cloned().collect();
        for key in &keys {
            self.remove_edge(key);
        }
        self.nodes.remove(id);
    }

    /// Makes sure a citation or abrogation target exists, creating stubs for
    /// the law and, for article targets, the article.
    fn ensure_target(&mut self, target: &str) {
        if self.nodes.contains_key(target) {
            return;
        }
        let law_id = law_part(target);
        if !self.nodes.contains_key(law_id) {
            self.nodes.insert(
                law_id.to_string(),
                NodeRecord {
                    node_id: law_id.to_string(),
                    kind: NodeKind::Law,
                    properties: NodeProps {
                        stub: true,
                        ..Default::default()
                    },
                },
            );
        }
        if target != law_id {
            let number = target.rsplit("#art_").next().map(str::to_string);
            self.nodes.insert(
                target.to_string(),
                NodeRecord {
                    node_id: target.to_string(),
                    kind: NodeKind::Article,
                    properties: NodeProps {
                        number,
                        stub: true,
                        ..Default::default()
                    },
                },
            );
            self.insert_edge(
                EdgeKey {
                    src: law_id.to_string(),
                    dst: target.to_string(),
                    kind: EdgeKind::Contains,
                    ref_kind: None,
                },
                EdgeProps::default(),
            );
        }
    }

    /// Inserts or replaces a law, its articles and its outgoing citations.
    /// Cited laws or articles that are not in the graph become stub nodes.
    pub fn upsert_law(&mut self, doc: &LawDocument) -> String {
        let law_id = doc.law_id.clone();

        // Drop the previous version's citations.
        let old_articles: BTreeSet<String> = self
            .out_keys(&law_id)
            .filter(|k| k.kind == EdgeKind::Contains)
            .map(|k| k.dst.clone())
            .collect();
        let stale: Vec<EdgeKey> = std::iter::once(law_id.as_str())
            .chain(old_articles.iter().map(String::as_str))
            .flat_map(|id| self.out_keys(id))
            .filter(|k| k.kind == EdgeKind::Cites)
            .cloned()
            .collect();
        for key in &stale {
            self.remove_edge(key);
        }

        self.nodes.insert(
            law_id.clone(),
            NodeRecord {
                node_id: law_id.clone(),
                kind: NodeKind::Law,
                properties: NodeProps {
                    title: Some(doc.title.clone()),
                    publication_date: Some(doc.publication_date),
                    ministry_domain: doc.ministry_domain.clone(),
                    text_digest: Some(digest(&doc.full_text)),
                    number: None,
                    text: Some(doc.full_text.clone()),
                    stub: false,
                },
            },
        );

        let mut current = BTreeSet::new();
        for article in &doc.articles {
            current.insert(article.article_id.clone());
            self.nodes.insert(
                article.article_id.clone(),
                NodeRecord {
                    node_id: article.article_id.clone(),
                    kind: NodeKind::Article,
                    properties: NodeProps {
                        title: article.heading.clone(),
                        text_digest: Some(digest(&article.text)),
                        number: Some(article.number.clone()),
                        text: Some(article.text.clone()),
                        ..Default::default()
                    },
                },
            );
            self.insert_edge(
                EdgeKey {
                    src: law_id.clone(),
                    dst: article.article_id.clone(),
                    kind: EdgeKind::Contains,
                    ref_kind: None,
                },
                EdgeProps::default(),
            );
        }
        // Articles dropped by the new version survive as stubs while cited.
        for gone in old_articles.difference(&current) {
            let cited = self.in_keys(gone).any(|k| k.kind == EdgeKind::Cites);
            if cited {
                if let Some(node) = self.nodes.get_mut(gone) {
                    node.properties = NodeProps {
                        number: node.properties.number.take(),
                        stub: true,
                        ..Default::default()
                    };
                }
            } else {
                self.remove_node(gone);
            }
        }

        for reference in doc.refs() {
            let source = if self.nodes.contains_key(&reference.source_unit) {
                reference.source_unit.clone()
            } else {
                law_id.clone()
            };
            self.ensure_target(&reference.target_uri);
            let key = EdgeKey {
                src: source,
                dst: reference.target_uri.clone(),
                kind: EdgeKind::Cites,
                ref_kind: Some(reference.kind),
            };
            let specific = self
                .edges
                .get(&key)
                .and_then(|p| p.specifies_paragraph)
                .unwrap_or(false)
                || reference.specifies_paragraph;
            self.insert_edge(
                key,
                EdgeProps {
                    ref_kind: Some(reference.kind),
                    specifies_paragraph: Some(specific),
                    effective_date: None,
                },
            );
        }

        for abrogation in &doc.abrogations {
            if abrogation.target_uri == law_id {
                continue;
            }
            self.ensure_target(&abrogation.target_uri);
            self.insert_abrogation(&law_id, &abrogation.target_uri, abrogation.effective_date);
        }
        law_id
    }

    /// Records that `src` abrogates `dst` from `effective_date`. Repeating the
    /// call keeps a single edge carrying the latest date given.
    pub fn add_abrogation(&mut self, src: &str, dst: &str, effective_date: NaiveDate) -> Result<(), GraphError> {
        for id in [src, dst] {
            let node = self
                .nodes
                .get(id)
                .ok_or_else(|| GraphError::NodeNotFound(id.to_string()))?;
            if !node.is_law() {
                return Err(GraphError::KindMismatch {
                    id: id.to_string(),
                    expected: NodeKind::Law,
                });
            }
        }
        self.insert_abrogation(src, dst, effective_date);
        Ok(())
    }

    fn insert_abrogation(&mut self, src: &str, dst: &str, effective_date: NaiveDate) {
        self.insert_edge(
            EdgeKey {
                src: src.to_string(),
                dst: dst.to_string(),
                kind: EdgeKind::Abrogates,
                ref_kind: None,
            },
            EdgeProps {
                effective_date: Some(effective_date),
                ..Default::default()
            },
        );
    }

    /// Ingested laws published on or before `as_of` that no abrogation
    /// effective on or before `as_of` targets.
    pub fn in_force_laws(&self, as_of: NaiveDate) -> BTreeSet<String> {
        self.ingested_laws()
            .filter(|law| law.properties.publication_date.is_some_and(|d| d <= as_of))
            .filter(|law| !self.is_abrogated(&law.node_id, as_of))
            .map(|law| law.node_id.clone())
            .collect()
    }

    pub fn is_in_force(&self, law_id: &str, as_of: NaiveDate) -> bool {
        self.nodes.get(law_id).is_some_and(|law| {
            law.is_law()
                && !law.is_stub()
                && law.properties.publication_date.is_some_and(|d| d <= as_of)
                && !self.is_abrogated(law_id, as_of)
        })
    }

    fn is_abrogated(&self, law_id: &str, as_of: NaiveDate) -> bool {
        self.in_keys(law_id).filter(|k| k.kind == EdgeKind::Abrogates).any(|k| {
            self.edges
                .get(k)
                .and_then(|p| p.effective_date)
                .is_some_and(|d| d <= as_of)
        })
    }

    /// `CITES` edges leaving a law and all of its articles (or a single
    /// article), optionally filtered by reference kind.
    pub fn outgoing_refs(&self, node_id: &str, ref_kind: Option<RefKind>) -> Result<Vec<EdgeRecord>, GraphError> {
        let node = self
            .nodes
            .get(node_id)
            .ok_or_else(|| GraphError::NodeNotFound(node_id.to_string()))?;
        let mut units = vec![node_id.to_string()];
        if node.is_law() {
            units.extend(
                self.out_keys(node_id)
                    .filter(|k| k.kind == EdgeKind::Contains)
                    .map(|k| k.dst.clone()),
            );
        }
        let mut refs: Vec<EdgeRecord> = units
            .iter()
            .flat_map(|u| self.out_keys(u))
            .filter(|k| k.kind == EdgeKind::Cites)
            .filter(|k| ref_kind.is_none() || k.ref_kind == ref_kind)
            .map(|k| to_record(k, &self.edges[k]))
            .collect();
        refs.sort_by(|a, b| (&a.src, &a.dst, a.properties.ref_kind).cmp(&(&b.src, &b.dst, b.properties.ref_kind)));
        Ok(refs)
    }

    /// Most cited targets, counting distinct citing laws (an article's
    /// citations count for its law). Ordered by count descending, then id.
    pub fn top_cited(
        &self,
        ref_kind: Option<RefKind>,
        within: Option<&BTreeSet<String>>,
        k: usize,
    ) -> Vec<(String, usize)> {
        let mut citing: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for key in self.edges.keys() {
            if key.kind != EdgeKind::Cites || (ref_kind.is_some() && key.ref_kind != ref_kind) {
                continue;
            }
            let law = law_part(&key.src);
            if within.is_some_and(|set| !set.contains(law)) {
                continue;
            }
            citing.entry(key.dst.as_str()).or_default().insert(law);
        }
        let mut ranked: Vec<(String, usize)> = citing
            .into_iter()
            .map(|(target, laws)| (target.to_string(), laws.len()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    /// Number of `kind` edges incident to a law, with article endpoints
    /// counted for their parent law.
    pub fn law_degree(&self, law_id: &str, kind: EdgeKind, outgoing: bool) -> usize {
        let mut units = vec![law_id.to_string()];
        if kind != EdgeKind::Contains {
            units.extend(
                self.out_keys(law_id)
                    .filter(|k| k.kind == EdgeKind::Contains)
                    .map(|k| k.dst.clone()),
            );
        }
        units
            .iter()
            .map(|u| {
                let keys: Box<dyn Iterator<Item = &EdgeKey>> = if outgoing {
                    Box::new(self.out_keys(u))
                } else {
                    Box::new(self.in_keys(u))
                };
                keys.filter(|k| k.kind == kind).count()
            })
            .sum()
    }

    /// Checks the structural invariants; used after loading snapshots.
    pub fn validate(&self) -> Result<(), GraphError> {
        let corrupt = |m: String| Err(GraphError::CorruptSnapshot(m));
        for (id, node) in &self.nodes {
            if *id != node.node_id {
                return corrupt(format!("node key {id} does not match id {}", node.node_id));
            }
            if node.kind == NodeKind::Article {
                let parent = law_part(id);
                let contained = self
                    .in_keys(id)
                    .any(|k| k.kind == EdgeKind::Contains && k.src == parent);
                if !contained {
                    return corrupt(format!("article {id} has no CONTAINS edge from {parent}"));
                }
            }
        }
        for (key, props) in &self.edges {
            let (Some(src), Some(dst)) = (self.nodes.get(&key.src), self.nodes.get(&key.dst)) else {
                return corrupt(format!("dangling edge {} -> {}", key.src, key.dst));
            };
            let ok = match key.kind {
                EdgeKind::Contains => src.is_law() && dst.kind == NodeKind::Article,
                EdgeKind::Cites => key.ref_kind.is_some() && props.ref_kind == key.ref_kind,
                EdgeKind::Abrogates => src.is_law() && dst.is_law() && props.effective_date.is_some(),
            };
            if !ok {
                return corrupt(format!("invalid {:?} edge {} -> {}", key.kind, key.src, key.dst));
            }
        }
        Ok(())
    }

    pub fn freeze(self) -> FrozenGraph {
        FrozenGraph(Arc::new(self))
    }
}

fn to_record(key: &EdgeKey, props: &EdgeProps) -> EdgeRecord {
    EdgeRecord {
        src: key.src.clone(),
        dst: key.dst.clone(),
        kind: key.kind,
        properties: props.clone(),
    }
}

/// Read-only shared view of a fully built graph.
#[derive(Debug, Clone)]
pub struct FrozenGraph(Arc<GraphStore>);

impl Deref for FrozenGraph {
    type Target = GraphStore;

    fn deref(&self) -> &GraphStore {
        &self.0
    }
}
