use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::LlmError;

/// Patterns that mark recommendation or opinion language.
pub const DEFAULT_NEUTRALITY_PATTERNS: &[&str] = &[
    "si raccomanda",
    "raccomandiamo",
    "raccomando",
    "si consiglia",
    "consigliamo",
    "consiglio di",
    "si suggerisce",
    "suggeriamo",
    "dovrebbe",
    "dovrebbero",
    "bisognerebbe",
    "sarebbe opportuno",
    "è opportuno",
    "occorrerebbe",
    "we recommend",
    "i recommend",
    "it is recommended",
    "we suggest",
    "should",
    "ought to",
    "it is advisable",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailVerdict {
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Scans text for recommendation language. Matching is case-insensitive
/// and on word boundaries; text between quotes is ignored so that quoted
/// metric or act names cannot trip it.
#[derive(Debug, Clone)]
pub struct NeutralityGuard {
    patterns: Vec<(String, Regex)>,
    quoted: Regex,
}

impl NeutralityGuard {
    pub fn new<I, S>(patterns: I) -> Result<Self, LlmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let patterns = patterns
            .into_iter()
            .map(|p| {
                let p = p.as_ref().trim().to_string();
                let words: Vec<String> = p.split_whitespace().map(regex::escape).collect();
                let source = format!(r"\b{}\b", words.join(r"\s+"));
                RegexBuilder::new(&source)
                    .case_insensitive(true)
                    .build()
                    .map(|re| (p.clone(), re))
                    .map_err(|e| LlmError::Config(format!("neutrality pattern {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if patterns.iter().any(|(p, _)| p.is_empty()) {
            return Err(LlmError::Config("empty neutrality pattern".into()));
        }
        let quoted = Regex::new("\"[^\"\\n]*\"|“[^”\\n]*”|«[^»\\n]*»|`[^`\\n]*`").expect("static regex");
        Ok(Self { patterns, quoted })
    }

    pub fn patterns(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(|(p, _)| p.as_str())
    }

    pub fn check(&self, text: &str) -> GuardrailVerdict {
        let unquoted = self.quoted.replace_all(text, " ");
        let violations: Vec<String> = self
            .patterns
            .iter()
            .filter(|(_, re)| re.is_match(&unquoted))
            .map(|(p, _)| p.clone())
            .collect();
        GuardrailVerdict {
            passed: violations.is_empty(),
            violations,
        }
    }
}

impl Default for NeutralityGuard {
    fn default() -> Self {
        Self::new(DEFAULT_NEUTRALITY_PATTERNS).expect("default patterns are valid")
    }
}

/// Checks `text` against the default pattern list.
pub fn check_neutrality(text: &str) -> GuardrailVerdict {
    static GUARD: std::sync::OnceLock<NeutralityGuard> = std::sync::OnceLock::new();
    GUARD.get_or_init(NeutralityGuard::default).check(text)
}
