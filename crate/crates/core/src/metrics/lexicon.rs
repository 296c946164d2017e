//! Word lists behind the part-of-speech heuristics.
//!
//! Lexicon files are UTF-8 plain text, one entry per line, `#` starts a
//! comment. A lexicon directory holds `pronouns.txt`, `adjective_suffixes.txt`,
//! `gerund_suffixes.txt`, `subordinators.txt` and optionally
//! `gerund_exceptions.txt`.

use std::collections::BTreeSet;
use std::path::Path;

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Gerund,
    Adjective,
    Pronoun,
    Other,
}

/// Classifies lowercase word tokens. Swap in a real tagger by implementing this.
pub trait PosTagger: Send + Sync {
    fn tag(&self, token: &str) -> PosTag;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosLexicons {
    pub pronoun_list: BTreeSet<String>,
    pub adjective_suffixes: BTreeSet<String>,
    pub gerund_suffixes: BTreeSet<String>,
    pub gerund_exceptions: BTreeSet<String>,
    pub subordinators: BTreeSet<String>,
}

pub fn parse_word_list(source: &str) -> BTreeSet<String> {
    source
        .lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl PosLexicons {
    /// The shipped Italian lists.
    pub fn italian() -> Self {
        Self {
            pronoun_list: parse_word_list(include_str!("../../lexicons/it/pronouns.txt")),
            adjective_suffixes: parse_word_list(include_str!("../../lexicons/it/adjective_suffixes.txt")),
            gerund_suffixes: parse_word_list(include_str!("../../lexicons/it/gerund_suffixes.txt")),
            gerund_exceptions: parse_word_list(include_str!("../../lexicons/it/gerund_exceptions.txt")),
            subordinators: parse_word_list(include_str!("../../lexicons/it/subordinators.txt")),
        }
    }

    pub fn from_dir(dir: &Path) -> Result<Self, MetricsError> {
        let read = |name: &str, required: bool| -> Result<BTreeSet<String>, MetricsError> {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(s) => Ok(parse_word_list(&s)),
                Err(e) if !required && e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeSet::new()),
                Err(e) => Err(MetricsError::Lexicon(format!("{}: {e}", path.display()))),
            }
        };
        let lexicons = Self {
            pronoun_list: read("pronouns.txt", true)?,
            adjective_suffixes: read("adjective_suffixes.txt", true)?,
            gerund_suffixes: read("gerund_suffixes.txt", true)?,
            gerund_exceptions: read("gerund_exceptions.txt", false)?,
            subordinators: read("subordinators.txt", true)?,
        };
        lexicons.validate()?;
        Ok(lexicons)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        for (name, set) in [
            ("pronouns", &self.pronoun_list),
            ("adjective suffixes", &self.adjective_suffixes),
            ("gerund suffixes", &self.gerund_suffixes),
            ("subordinators", &self.subordinators),
        ] {
            if set.is_empty() {
                return Err(MetricsError::Lexicon(format!("{name} list is empty")));
            }
        }
        Ok(())
    }

    pub fn is_subordinator(&self, token: &str) -> bool {
        self.subordinators.contains(token)
    }
}

impl Default for PosLexicons {
    fn default() -> Self {
        Self::italian()
    }
}

/// True when `token` ends with `suffix` and keeps at least two letters of stem.
fn has_suffix(token: &str, suffix: &str) -> bool {
    token.ends_with(suffix) && token.chars().count() >= suffix.chars().count() + 2
}

impl PosTagger for PosLexicons {
    fn tag(&self, token: &str) -> PosTag {
        if self.pronoun_list.contains(token) {
            return PosTag::Pronoun;
        }
        if !self.gerund_exceptions.contains(token) && self.gerund_suffixes.iter().any(|s| has_suffix(token, s)) {
            return PosTag::Gerund;
        }
        if self.adjective_suffixes.iter().any(|s| has_suffix(token, s)) {
            return PosTag::Adjective;
        }
        PosTag::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lists_are_valid_and_lowercase() {
        let lex = PosLexicons::italian();
        lex.validate().unwrap();
        for set in [
            &lex.pronoun_list,
            &lex.adjective_suffixes,
            &lex.gerund_suffixes,
            &lex.subordinators,
        ] {
            assert!(set.iter().all(|w| *w == w.to_lowercase()));
        }
    }

    #[test]
    fn tagging() {
        let lex = PosLexicons::italian();
        assert_eq!(lex.tag("procedendo"), PosTag::Gerund);
        assert_eq!(lex.tag("quando"), PosTag::Other);
        assert_eq!(lex.tag("egli"), PosTag::Pronoun);
        assert_eq!(lex.tag("quale"), PosTag::Pronoun);
        assert_eq!(lex.tag("nazionale"), PosTag::Adjective);
        assert_eq!(lex.tag("ale"), PosTag::Other);
        assert_eq!(lex.tag("legge"), PosTag::Other);
    }

    #[test]
    fn loads_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pronouns.txt"), "# c\nEgli\n\n").unwrap();
        std::fs::write(dir.path().join("adjective_suffixes.txt"), "oso").unwrap();
        std::fs::write(dir.path().join("gerund_suffixes.txt"), "ando\nendo").unwrap();
        std::fs::write(dir.path().join("subordinators.txt"), "che").unwrap();
        let lex = PosLexicons::from_dir(dir.path()).unwrap();
        assert!(lex.pronoun_list.contains("egli"));
        assert!(lex.gerund_exceptions.is_empty());
        std::fs::write(dir.path().join("subordinators.txt"), "# none\n").unwrap();
        assert!(PosLexicons::from_dir(dir.path()).is_err());
    }
}
