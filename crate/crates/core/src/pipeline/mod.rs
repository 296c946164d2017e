//! Landscape retrieval and draft analysis over a frozen graph and index.
//!
//! Landscape: extract topics, expand them, retrieve in-force laws by vector
//! similarity, rank the preamble citations of those laws. Draft analysis:
//! extract topics, retrieve in-force laws, compare the draft's readability
//! profile against theirs and render the report.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, DraftProposal, RefKind};
use crate::graph::{FrozenGraph, NodeRecord};
use crate::llm::{parse_topic_list, parse_topic_list_capped, ChatRequest, Gateway, LlmError, TemplateId};
use crate::metrics::{profile, MetricsError, PosLexicons, ReadabilityProfile};
use crate::report::{comparison_stats, polish_report, render_report, FallbackReason, Locale, ReportError, StatsBundle};
use crate::vector::{embedding_text, Embedder, HnswConfig, HnswIndex, VectorError};

pub const DEFAULT_K: usize = 20;
pub const MAX_EXPANDED_TOPICS: usize = 20;
pub const OVERFETCH_FACTOR: usize = 4;
pub const DEFAULT_EMBEDDING_CHARS: usize = 2048;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input text is empty")]
    EmptyInput,
    #[error("no topics could be extracted from the input")]
    EmptyTopics,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("unknown law {0}")]
    UnknownLaw(String),
    #[error("index is not frozen")]
    IndexNotFrozen,
    #[error("embedder dimension {embedder} does not match index dimension {index}")]
    DimensionMismatch { embedder: usize, index: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSet {
    pub seed_topics: Vec<String>,
    pub expanded_topics: Vec<String>,
    /// Set when expansion failed and the seed was used as is.
    pub expansion_degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantLaw {
    pub law_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantLawSet {
    pub as_of: NaiveDate,
    pub entries: Vec<RelevantLaw>,
}

impl RelevantLawSet {
    pub fn law_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.law_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundationCitation {
    pub target_id: String,
    pub citing_count: usize,
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeResult {
    pub input_text: String,
    pub as_of: NaiveDate,
    pub k: usize,
    pub topics: TopicSet,
    pub relevant_laws: RelevantLawSet,
    pub foundations: Vec<FoundationCitation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftReport {
    pub draft_id: String,
    pub title: String,
    pub as_of: NaiveDate,
    pub k: usize,
    pub topics: TopicSet,
    pub relevant_laws: RelevantLawSet,
    pub profile: ReadabilityProfile,
    pub comparison: StatsBundle,
    pub report_text: String,
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<FallbackReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law_id: String,
    pub comparison: StatsBundle,
    pub report_text: String,
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<FallbackReason>,
}

/// Selects ingested laws. Empty fields do not filter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawFilter {
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub domain: Option<String>,
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    #[serde(default)]
    pub q: Option<String>,
}

impl LawFilter {
    pub fn matches(&self, law: &NodeRecord) -> bool {
        let p = &law.properties;
        if let Some(year) = self.year {
            if p.publication_date.map(|d| d.year()) != Some(year) {
                return false;
            }
        }
        if let Some(domain) = &self.domain {
            if !p
                .ministry_domain
                .as_deref()
                .is_some_and(|d| d.eq_ignore_ascii_case(domain))
            {
                return false;
            }
        }
        if let Some(ids) = &self.ids {
            if !ids.contains(&law.node_id) {
                return false;
            }
        }
        if let Some(q) = self.q.as_deref().map(str::to_lowercase).filter(|q| !q.is_empty()) {
            let title = p.title.as_deref().unwrap_or_default().to_lowercase();
            if !title.contains(&q) && !law.node_id.to_lowercase().contains(&q) {
                return false;
            }
        }
        true
    }

    /// Short text naming the selection, used as the report's set descriptor.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(year) = self.year {
            parts.push(format!("year={year}"));
        }
        if let Some(domain) = &self.domain {
            parts.push(format!("domain={domain}"));
        }
        if let Some(ids) = &self.ids {
            parts.push(format!("ids={}", ids.join(",")));
        }
        if let Some(q) = &self.q {
            parts.push(format!("q={q}"));
        }
        if parts.is_empty() {
            "all".to_string()
        } else {
            parts.join("; ")
        }
    }
}

/// Text embedded for a law: its title plus the first `max_chars` characters
/// of the body that follows the title.
pub fn law_embedding_text(law: &NodeRecord, max_chars: usize) -> String {
    let title = law.properties.title.as_deref().unwrap_or_default();
    let text = law.properties.text.as_deref().unwrap_or_default();
    let body = text.strip_prefix(title).unwrap_or(text).trim_start();
    embedding_text(title, body, max_chars)
}

/// Embeds every ingested law and returns the frozen index.
pub fn build_index(
    graph: &FrozenGraph,
    embedder: &dyn Embedder,
    config: HnswConfig,
    max_chars: usize,
) -> Result<HnswIndex, VectorError> {
    let laws: Vec<&NodeRecord> = graph.ingested_laws().collect();
    let vectors = laws
        .par_iter()
        .map(|law| {
            embedder
                .embed(&law_embedding_text(law, max_chars))
                .map(|v| (law.node_id.clone(), v))
        })
        .collect::<Vec<_>>();
    let mut index = HnswIndex::new(embedder.dimension(), config)?;
    for result in vectors {
        match result {
            Ok((id, v)) => index.insert(&id, &v)?,
            Err(VectorError::EmptyText) => log::warn!("law without embeddable text skipped"),
            Err(e) => return Err(e),
        }
    }
    index.freeze();
    Ok(index)
}

/// Read-only services over one frozen graph and index.
pub struct Engine {
    graph: FrozenGraph,
    index: Arc<HnswIndex>,
    embedder: Arc<dyn Embedder>,
    gateway: Gateway,
    lexicons: Arc<PosLexicons>,
    locale: Locale,
    profiles: BTreeMap<String, Result<ReadabilityProfile, MetricsError>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("laws", &self.profiles.len())
            .field("index", &self.index.len())
            .field("gateway", &self.gateway)
            .finish()
    }
}

impl Engine {
    pub fn new(
        graph: FrozenGraph,
        index: Arc<HnswIndex>,
        embedder: Arc<dyn Embedder>,
        gateway: Gateway,
        lexicons: Arc<PosLexicons>,
    ) -> Result<Self, PipelineError> {
        if !index.is_frozen() {
            return Err(PipelineError::IndexNotFrozen);
        }
        if embedder.dimension() != index.dimension() {
            return Err(PipelineError::DimensionMismatch {
                embedder: embedder.dimension(),
                index: index.dimension(),
            });
        }
        let laws: Vec<(&str, &str)> = graph
            .ingested_laws()
            .map(|l| (l.node_id.as_str(), l.properties.text.as_deref().unwrap_or_default()))
            .collect();
        let profiles = laws
            .par_iter()
            .map(|(id, text)| (id.to_string(), profile(text, &lexicons)))
            .collect();
        Ok(Self {
            graph,
            index,
            embedder,
            gateway,
            lexicons,
            locale: Locale::default(),
            profiles,
        })
    }

    pub fn with_locale(mut self, locale: Locale) -> Self {
        self.locale = locale;
        self
    }

    pub fn graph(&self) -> &FrozenGraph {
        &self.graph
    }

    pub fn index(&self) -> &HnswIndex {
        &self.index
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn lexicons(&self) -> &PosLexicons {
        &self.lexicons
    }

    pub fn locale(&self) -> Locale {
        self.locale
    }

    /// Readability profile of an ingested law.
    pub fn law_profile(&self, law_id: &str) -> Result<&ReadabilityProfile, PipelineError> {
        match self.profiles.get(law_id) {
            None => Err(PipelineError::UnknownLaw(law_id.to_string())),
            Some(Ok(p)) => Ok(p),
            Some(Err(e)) => Err(PipelineError::Metrics(e.clone())),
        }
    }

    /// Ingested laws matching `filter`, by id.
    pub fn select_laws<'a>(&'a self, filter: &'a LawFilter) -> impl Iterator<Item = &'a NodeRecord> + 'a {
        self.graph.ingested_laws().filter(move |l| filter.matches(l))
    }

    pub fn extract_topics(&self, input_text: &str) -> Result<TopicSet, PipelineError> {
        if input_text.trim().is_empty() {
            return Err(PipelineError::EmptyInput);
        }
        let raw = self
            .gateway
            .chat(&ChatRequest::new(TemplateId::TopicExtraction).var("text", input_text))?;
        let seed = match parse_topic_list(&raw) {
            Ok(topics) => topics,
            Err(LlmError::UnparsableOutput(_)) => return Err(PipelineError::EmptyTopics),
            Err(e) => return Err(e.into()),
        };
        Ok(TopicSet {
            expanded_topics: seed.clone(),
            seed_topics: seed,
            expansion_degraded: false,
        })
    }

    /// Best effort: a gateway or parsing failure leaves the seed unchanged
    /// and sets `expansion_degraded`.
    pub fn expand_topics(&self, topics: &TopicSet) -> TopicSet {
        let request = ChatRequest::new(TemplateId::TopicExpansion)
            .var("topics", topics.seed_topics.join("\n"))
            .var("max_topics", MAX_EXPANDED_TOPICS.to_string());
        let expansion = self
            .gateway
            .chat(&request)
            .map_err(|e| e.to_string())
            .and_then(|raw| parse_topic_list_capped(&raw, usize::MAX).map_err(|e| e.to_string()));
        match expansion {
            Ok(extra) => {
                let mut expanded = topics.seed_topics.clone();
                for t in extra {
                    if !expanded.contains(&t) {
                        expanded.push(t);
                    }
                }
                expanded.truncate(MAX_EXPANDED_TOPICS.max(topics.seed_topics.len()));
                TopicSet {
                    seed_topics: topics.seed_topics.clone(),
                    expanded_topics: expanded,
                    expansion_degraded: false,
                }
            }
            Err(e) => {
                log::warn!("topic expansion failed, continuing with the seed topics: {e}");
                TopicSet {
                    seed_topics: topics.seed_topics.clone(),
                    expanded_topics: topics.seed_topics.clone(),
                    expansion_degraded: true,
                }
            }
        }
    }

    /// Nearest in-force laws to the joined topics. The index is queried for
    /// `4k` candidates, doubling until `k` in-force laws are found or the
    /// index is exhausted.
    pub fn retrieve_relevant(
        &self,
        topics: &TopicSet,
        as_of: NaiveDate,
        k: usize,
    ) -> Result<RelevantLawSet, PipelineError> {
        if k == 0 {
            return Err(PipelineError::InvalidK);
        }
        if self.index.is_empty() {
            return Err(VectorError::EmptyIndex.into());
        }
        let query = self.embedder.embed(&topics.expanded_topics.join(" "))?;
        let in_force = self.graph.in_force_laws(as_of);
        let total = self.index.len();
        let mut fetch = k.saturating_mul(OVERFETCH_FACTOR).min(total);
        let mut entries = loop {
            let ef = self.index.config().ef_search.max(fetch);
            let hits = self.index.search(&query, fetch, ef)?;
            let kept: Vec<RelevantLaw> = hits
                .into_iter()
                .filter(|(id, _)| in_force.contains(id))
                .map(|(law_id, d)| RelevantLaw {
                    law_id,
                    similarity: 1.0 - f64::from(d),
                })
                .collect();
            if kept.len() >= k || fetch >= total {
                break kept;
            }
            fetch = fetch.saturating_mul(2).min(total);
        };
        entries.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.law_id.cmp(&b.law_id))
        });
        entries.truncate(k);
        Ok(RelevantLawSet { as_of, entries })
    }

    /// Preamble citations of the relevant laws, counted once per citing law.
    pub fn rank_foundations(&self, relevant: &RelevantLawSet) -> Vec<FoundationCitation> {
        let laws: BTreeSet<&str> = relevant.law_ids().collect();
        if laws.is_empty() {
            return Vec::new();
        }
        let mut citing: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
        for law in &laws {
            let Ok(refs) = self.graph.outgoing_refs(law, Some(RefKind::Preamble)) else {
                continue;
            };
            for edge in refs {
                citing.entry(edge.dst).or_default().insert(law);
            }
        }
        let n = laws.len() as f64;
        let mut ranked: Vec<FoundationCitation> = citing
            .into_iter()
            .map(|(target_id, by)| FoundationCitation {
                target_id,
                citing_count: by.len(),
                relative_frequency: by.len() as f64 / n,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.citing_count
                .cmp(&a.citing_count)
                .then_with(|| a.target_id.cmp(&b.target_id))
        });
        ranked
    }

    pub fn landscape(&self, input_text: &str, as_of: NaiveDate, k: usize) -> Result<LandscapeResult, PipelineError> {
        if k == 0 {
            return Err(PipelineError::InvalidK);
        }
        let seed = self.extract_topics(input_text)?;
        let topics = self.expand_topics(&seed);
        let relevant_laws = self.retrieve_relevant(&topics, as_of, k)?;
        let foundations = self.rank_foundations(&relevant_laws);
        Ok(LandscapeResult {
            input_text: input_text.to_string(),
            as_of,
            k,
            topics,
            relevant_laws,
            foundations,
        })
    }

    /// Profiles of `law_ids`, skipping laws whose text yields no profile.
    fn profiles_of<'a>(&self, law_ids: impl Iterator<Item = &'a str>) -> Vec<ReadabilityProfile> {
        law_ids
            .filter_map(|id| match self.profiles.get(id) {
                Some(Ok(p)) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn analyze_draft(
        &self,
        draft: &DraftProposal,
        as_of: NaiveDate,
        k: usize,
    ) -> Result<DraftReport, PipelineError> {
        if draft.text.trim().is_empty() {
            return Err(CorpusError::EmptyDraft.into());
        }
        if k == 0 {
            return Err(PipelineError::InvalidK);
        }
        let source = if draft.title.trim().is_empty() {
            &draft.text
        } else {
            &draft.title
        };
        let topics = self.extract_topics(source)?;
        let relevant_laws = self.retrieve_relevant(&topics, as_of, k)?;
        let draft_profile = profile(&draft.text, &self.lexicons)?;
        let others = self.profiles_of(relevant_laws.law_ids());
        let descriptor = match self.locale {
            Locale::It => format!("leggi in vigore al {as_of} affini alla proposta (k={k})"),
            Locale::En => format!("in-force laws as of {as_of} related to the draft (k={k})"),
        };
        let comparison = comparison_stats(&draft.draft_id, &draft_profile, &others, &descriptor)?;
        let polished = polish_report(&self.gateway, &render_report(&comparison, self.locale));
        Ok(DraftReport {
            draft_id: draft.draft_id.clone(),
            title: draft.title.clone(),
            as_of,
            k,
            topics,
            relevant_laws,
            profile: draft_profile,
            comparison,
            report_text: polished.text,
            fallback: polished.fallback,
            fallback_reason: polished.fallback_reason,
        })
    }

    /// Compares one law against the laws selected by `filter`, excluding
    /// the law itself.
    pub fn law_report(&self, law_id: &str, filter: &LawFilter, locale: Locale) -> Result<LawReport, PipelineError> {
        let subject = self.law_profile(law_id)?;
        let ids: Vec<&str> = self
            .select_laws(filter)
            .map(|l| l.node_id.as_str())
            .filter(|id| *id != law_id)
            .collect();
        let others = self.profiles_of(ids.into_iter());
        let comparison = comparison_stats(law_id, subject, &others, &filter.describe())?;
        let polished = polish_report(&self.gateway, &render_report(&comparison, locale));
        Ok(LawReport {
            law_id: law_id.to_string(),
            comparison,
            report_text: polished.text,
            fallback: polished.fallback,
            fallback_reason: polished.fallback_reason,
        })
    }
}
