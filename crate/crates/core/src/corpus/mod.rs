//! Corpus ingestion: Akoma Ntoso acts, plain-text acts, draft proposals and
//! line-delimited corpus manifests.

mod akn;
mod draft;
mod manifest;
mod plain;
pub mod uri;

use std::cmp::Ordering;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use akn::parse_akn_document;
pub use draft::{parse_draft, parse_draft_file};
pub use manifest::{scan_corpus, CorpusScan, IngestFailure, IngestStats, ManifestRecord, SourceFormat};
pub use plain::parse_plain_document;
pub use uri::{article_id, law_part, normalize_uri, NormalizedUri};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("document has no FRBR work identifier")]
    MissingIdentifier,
    #[error("unparsable href: {0:?}")]
    UnparsableHref(String),
    #[error("invalid date: {0:?}")]
    InvalidDate(String),
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("draft has neither title nor text")]
    EmptyDraft,
    #[error("manifest not found: {}", .0.display())]
    ManifestNotFound(PathBuf),
    #[error("manifest line {line}: {message}")]
    InvalidManifestRecord { line: usize, message: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Where a reference sits in the act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefKind {
    Preamble,
    Body,
}

impl RefKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RefKind::Preamble => "preamble",
            RefKind::Body => "body",
        }
    }
}

impl std::str::FromStr for RefKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "preamble" => Ok(RefKind::Preamble),
            "body" => Ok(RefKind::Body),
            other => Err(format!("unknown reference kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReference {
    /// Law id or article id the reference appears in.
    pub source_unit: String,
    pub target_uri: String,
    pub kind: RefKind,
    pub specifies_paragraph: bool,
    pub raw_href: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleUnit {
    pub article_id: String,
    /// Article label such as `3` or `3-bis`.
    pub number: String,
    pub heading: Option<String>,
    pub text: String,
}

/// A repeal declared by the act itself, law-level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abrogation {
    pub target_uri: String,
    pub effective_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawDocument {
    pub law_id: String,
    pub title: String,
    pub publication_date: NaiveDate,
    pub ministry_domain: Option<String>,
    pub articles: Vec<ArticleUnit>,
    pub preamble_refs: Vec<RawReference>,
    pub body_refs: Vec<RawReference>,
    #[serde(default)]
    pub abrogations: Vec<Abrogation>,
    pub full_text: String,
}

impl LawDocument {
    pub fn refs(&self) -> impl Iterator<Item = &RawReference> {
        self.preamble_refs.iter().chain(self.body_refs.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftProposal {
    pub draft_id: String,
    pub title: String,
    pub text: String,
    pub proponent: Option<String>,
    pub submitted_date: Option<NaiveDate>,
}

const LATIN_ORDINALS: [&str; 15] = [
    "bis",
    "ter",
    "quater",
    "quinquies",
    "sexies",
    "septies",
    "octies",
    "novies",
    "decies",
    "undecies",
    "duodecies",
    "terdecies",
    "quaterdecies",
    "quinquiesdecies",
    "sexiesdecies",
];

/// Orders article labels numerically, then by Latin extension (`bis`, `ter`, ...).
pub fn compare_article_numbers(a: &str, b: &str) -> Ordering {
    article_sort_key(a).cmp(&article_sort_key(b))
}

fn article_sort_key(label: &str) -> (u64, usize, String) {
    let digits: String = label.chars().take_while(char::is_ascii_digit).collect();
    let base = digits.parse().unwrap_or(u64::MAX);
    let suffix = label[digits.len()..]
        .trim_start_matches(['-', '_', ' '])
        .to_ascii_lowercase();
    let ordinal = if suffix.is_empty() {
        0
    } else {
        LATIN_ORDINALS
            .iter()
            .position(|o| *o == suffix || (*o == "novies" && suffix == "nonies"))
            .map_or(usize::MAX, |p| p + 1)
    };
    (base, ordinal, suffix)
}

/// Extracts an article label from text like `Art. 3-bis.` or an eId like `art_3`.
pub(crate) fn article_label(raw: &str) -> Option<String> {
    let lower = raw.trim().to_lowercase();
    let start = lower.find(|c: char| c.is_ascii_digit())?;
    let rest = &lower[start..];
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    let after = rest[digits.len()..].trim_start_matches(['-', ' ', '_']);
    let word: String = after.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    if !word.is_empty() && (LATIN_ORDINALS.contains(&word.as_str()) || word == "nonies") {
        Some(format!("{digits}-{word}"))
    } else {
        Some(digits)
    }
}

/// Collapses whitespace runs and trims.
pub(crate) fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn article_labels() {
        assert_eq!(article_label("Art. 3-bis.").as_deref(), Some("3-bis"));
        assert_eq!(article_label("Articolo 12").as_deref(), Some("12"));
        assert_eq!(article_label("art_4").as_deref(), Some("4"));
        assert_eq!(article_label("Art. 2 ter").as_deref(), Some("2-ter"));
        assert_eq!(article_label("Art. 5. Oggetto").as_deref(), Some("5"));
        assert_eq!(article_label("Premessa"), None);
    }

    #[test]
    fn article_ordering() {
        let mut labels = vec!["10", "3-ter", "2", "3", "3-bis", "1"];
        labels.sort_by(|a, b| compare_article_numbers(a, b));
        assert_eq!(labels, vec!["1", "2", "3", "3-bis", "3-ter", "10"]);
    }
}
