use std::fmt::Write;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ReportError, StatsBundle};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    #[default]
    It,
    En,
}

impl FromStr for Locale {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "it" => Ok(Locale::It),
            "en" => Ok(Locale::En),
            other => Err(ReportError::UnknownLocale(other.to_string())),
        }
    }
}

struct Labels {
    title: &'static str,
    set: &'static str,
    size: &'static str,
    value: &'static str,
    mean: &'static str,
    std: &'static str,
    z: &'static str,
    percentile: &'static str,
    note: &'static str,
}

const IT: Labels = Labels {
    title: "Profilo di leggibilità",
    set: "Insieme di confronto",
    size: "Numero di testi nell'insieme",
    value: "Valore",
    mean: "Media dell'insieme",
    std: "Deviazione standard dell'insieme",
    z: "Punteggio z",
    percentile: "Percentile",
    note: "Tutti i valori sono calcolati in modo deterministico dal testo. Il percentile indica la posizione del valore nell'insieme di confronto.",
};

const EN: Labels = Labels {
    title: "Readability profile",
    set: "Comparison set",
    size: "Number of texts in the set",
    value: "Value",
    mean: "Set mean",
    std: "Set standard deviation",
    z: "z-score",
    percentile: "Percentile",
    note: "All values are computed deterministically from the text. The percentile gives the position of the value within the comparison set.",
};

fn metric_label(metric: &str, locale: Locale) -> &str {
    let (it, en) = match metric {
        "gulpease" => ("Indice Gulpease", "Gulpease index"),
        "flesch" => ("Indice di Flesch", "Flesch reading ease"),
        "avg_word_length" => (
            "Lunghezza media delle parole (lettere)",
            "Average word length (letters)",
        ),
        "avg_sentence_length" => (
            "Lunghezza media delle frasi (parole)",
            "Average sentence length (words)",
        ),
        "gerund_ratio" => ("Quota di gerundi", "Gerund ratio"),
        "adjective_ratio" => ("Quota di aggettivi", "Adjective ratio"),
        "pronoun_ratio" => ("Quota di pronomi", "Pronoun ratio"),
        "embedding_index" => ("Indice di subordinazione", "Embedding index"),
        "center_embedding_index" => ("Indice di incassamento centrale", "Center-embedding index"),
        other => (other, other),
    };
    match locale {
        Locale::It => it,
        Locale::En => en,
    }
}

fn fixed(value: f64) -> String {
    let s = format!("{value:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Markdown report for `bundle`. Identical bundles give identical bytes.
pub fn render_report(bundle: &StatsBundle, locale: Locale) -> String {
    let l = match locale {
        Locale::It => &IT,
        Locale::En => &EN,
    };
    let mut out = String::new();
    let _ = writeln!(out, "# {}: `{}`", l.title, bundle.subject);
    let _ = writeln!(out);
    let _ = writeln!(out, "{}: `{}`", l.set, bundle.set_descriptor);
    let _ = writeln!(out);
    let _ = writeln!(out, "{}: {}", l.size, bundle.set_size);
    for m in &bundle.metrics {
        let _ = writeln!(out);
        let _ = writeln!(out, "## {}", metric_label(&m.metric, locale));
        let _ = writeln!(out);
        let _ = writeln!(out, "- {}: {}", l.value, fixed(m.subject_value));
        let _ = writeln!(out, "- {}: {}", l.mean, fixed(m.set_mean));
        let _ = writeln!(out, "- {}: {}", l.std, fixed(m.set_std));
        let _ = writeln!(out, "- {}: {}", l.z, fixed(m.z_score));
        let _ = writeln!(out, "- {}: {}", l.percentile, fixed(m.percentile));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{}", l.note);
    out
}

/// Numerals in `text`, in order of appearance. Digit groups joined by a
/// single `.` or `,` count as one numeral.
pub fn numerals(text: &str) -> Vec<String> {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:[.,]\d+)*").expect("static regex"))
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}
