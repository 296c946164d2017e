//! Comparison statistics between one readability profile and a set, and
//! the factual report built from them.

mod render;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatRequest, Gateway, TemplateId};
use crate::metrics::ReadabilityProfile;

pub use render::{numerals, render_report, Locale};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("comparison set is empty")]
    EmptyComparisonSet,
    #[error("unknown locale {0:?}")]
    UnknownLocale(String),
}

/// Profile fields that are compared, in report order.
pub const COMPARED_METRICS: [&str; 9] = [
    "gulpease",
    "flesch",
    "avg_word_length",
    "avg_sentence_length",
    "gerund_ratio",
    "adjective_ratio",
    "pronoun_ratio",
    "embedding_index",
    "center_embedding_index",
];

pub fn metric_value(profile: &ReadabilityProfile, metric: &str) -> Option<f64> {
    Some(match metric {
        "gulpease" => profile.gulpease,
        "flesch" => profile.flesch,
        "avg_word_length" => profile.avg_word_length,
        "avg_sentence_length" => profile.avg_sentence_length,
        "gerund_ratio" => profile.gerund_ratio,
        "adjective_ratio" => profile.adjective_ratio,
        "pronoun_ratio" => profile.pronoun_ratio,
        "embedding_index" => profile.embedding_index,
        "center_embedding_index" => profile.center_embedding_index,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub metric: String,
    pub subject_value: f64,
    pub set_mean: f64,
    pub set_std: f64,
    pub z_score: f64,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsBundle {
    pub subject: String,
    pub set_size: usize,
    pub set_descriptor: String,
    pub metrics: Vec<MetricStats>,
}

impl StatsBundle {
    pub fn metric(&self, name: &str) -> Option<&MetricStats> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

/// Mean, population standard deviation, z-score and midrank percentile of
/// `subject` within `values`. Values are summed in sorted order so the
/// result does not depend on the order of the set.
pub fn describe(subject: f64, values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(f64::total_cmp);
    let std = (sq.iter().sum::<f64>() / n).sqrt();
    let z = if std == 0.0 { 0.0 } else { (subject - mean) / std };
    let below = sorted.iter().filter(|v| **v < subject).count() as f64;
    let equal = sorted.iter().filter(|v| **v == subject).count() as f64;
    let percentile = 100.0 * (below + 0.5 * equal) / n;
    Some((mean, std, z, percentile))
}

pub fn comparison_stats(
    subject_label: &str,
    subject: &ReadabilityProfile,
    others: &[ReadabilityProfile],
    set_descriptor: &str,
) -> Result<StatsBundle, ReportError> {
    if others.is_empty() {
        return Err(ReportError::EmptyComparisonSet);
    }
    let metrics = COMPARED_METRICS
        .iter()
        .map(|&name| {
            let value = metric_value(subject, name).expect("known metric");
            let set: Vec<f64> = others
                .iter()
                .map(|p| metric_value(p, name).expect("known metric"))
                .collect();
            let (set_mean, set_std, z_score, percentile) = describe(value, &set).expect("non-empty set");
            MetricStats {
                metric: name.to_string(),
                subject_value: value,
                set_mean,
                set_std,
                z_score,
                percentile,
            }
        })
        .collect();
    Ok(StatsBundle {
        subject: subject_label.to_string(),
        set_size: others.len(),
        set_descriptor: set_descriptor.to_string(),
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackReason {
    Guardrail,
    NumeralLoss,
    Gateway,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolishedReport {
    pub text: String,
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<FallbackReason>,
}

impl PolishedReport {
    fn fallback(markdown: &str, reason: FallbackReason) -> Self {
        Self {
            text: markdown.to_string(),
            fallback: true,
            fallback_reason: Some(reason),
        }
    }
}

/// Sends the template report through `report_polish`. The completion is
/// kept only if it passes the gateway's neutrality guard and still contains
/// every numeral of the input (as a multiset); otherwise the input is
/// returned unchanged with the fallback flag set.
pub fn polish_report(gateway: &Gateway, markdown: &str) -> PolishedReport {
    let request = ChatRequest::new(TemplateId::ReportPolish).var("report", markdown);
    let output = match gateway.chat(&request) {
        Ok(output) => output,
        Err(e) => {
            log::warn!("report polish failed, using template text: {e}");
            return PolishedReport::fallback(markdown, FallbackReason::Gateway);
        }
    };
    let verdict = gateway.guard().check(&output);
    if !verdict.passed {
        log::warn!("report polish tripped the neutrality guard: {:?}", verdict.violations);
        return PolishedReport::fallback(markdown, FallbackReason::Guardrail);
    }
    if !contains_numerals(&output, markdown) {
        log::warn!("report polish dropped numerals, using template text");
        return PolishedReport::fallback(markdown, FallbackReason::NumeralLoss);
    }
    PolishedReport {
        text: output,
        fallback: false,
        fallback_reason: None,
    }
}

/// True when the numeral multiset of `text` includes that of `reference`.
pub fn contains_numerals(text: &str, reference: &str) -> bool {
    let mut have = numerals(text);
    for n in numerals(reference) {
        match have.iter().position(|h| *h == n) {
            Some(i) => {
                have.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}
