use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::{parse_topic_list_capped, BackendCall, BackendError, ChatBackend, TemplateId};
use crate::metrics::parse_word_list;

/// Deterministic offline backend.
///
/// * `topic_extraction`: the three most frequent content tokens of `text`
///   (stopwords and tokens shorter than three letters are skipped; ties
///   break alphabetically), comma-separated.
/// * `topic_expansion`: each input topic followed by `<topic>-affine`.
/// * `report_polish`: returns `report` unchanged.
#[derive(Debug, Clone, Default)]
pub struct MockBackend;

pub(crate) fn stopwords() -> &'static BTreeSet<String> {
    static WORDS: OnceLock<BTreeSet<String>> = OnceLock::new();
    WORDS.get_or_init(|| parse_word_list(include_str!("../../lexicons/it/stopwords.txt")))
}

/// The mock extraction rule, exposed so tests can use it as an oracle.
pub fn mock_top_tokens(text: &str, n: usize) -> Vec<String> {
    let stop = stopwords();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for token in text.split(|c: char| !c.is_alphabetic()) {
        let token = token.to_lowercase();
        if token.chars().count() >= 3 && !stop.contains(&token) {
            *counts.entry(token).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(n).map(|(t, _)| t).collect()
}

impl ChatBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, call: &BackendCall) -> Result<String, BackendError> {
        let var = |name: &str| call.variables.get(name).map(String::as_str).unwrap_or_default();
        match call.template_id {
            TemplateId::TopicExtraction => Ok(mock_top_tokens(var("text"), 3).join(", ")),
            TemplateId::TopicExpansion => {
                let topics = parse_topic_list_capped(var("topics"), usize::MAX).unwrap_or_default();
                let out: Vec<String> = topics.iter().flat_map(|t| [t.clone(), format!("{t}-affine")]).collect();
                Ok(out.join(", "))
            }
            TemplateId::ReportPolish => Ok(var("report").to_string()),
        }
    }
}
