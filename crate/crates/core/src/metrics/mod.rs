//! Readability metrics for Italian legal text.
//!
//! All indices of a [`ReadabilityProfile`] come from one tokenization pass:
//! sentences from [`split_sentences`], words as maximal letter runs, letters
//! as alphabetic characters and syllables as vowel groups.
//!
//! * Gulpease: `89 + (300·S − 10·L) / W`, clamped to `[0, 100]`.
//! * Flesch reading ease: `c0 − c1·W/S − c2·Y/W`, default coefficients
//!   `(206.835, 1.015, 84.6)`, not clamped.

mod clauses;
mod lexicon;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clauses::{sentence_clauses, ClauseCounts};
pub use lexicon::{parse_word_list, PosLexicons, PosTag, PosTagger};
pub use tokenize::{count_syllables_it, split_sentences, words};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("text has no words")]
    EmptyText,
    #[error("word has no letters")]
    NoLetters,
    #[error("lexicon error: {0}")]
    Lexicon(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleschCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for FleschCoefficients {
    fn default() -> Self {
        Self {
            c0: 206.835,
            c1: 1.015,
            c2: 84.6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityProfile {
    pub word_count: usize,
    pub sentence_count: usize,
    pub letter_count: usize,
    pub syllable_count: usize,
    /// Letters per word.
    pub avg_word_length: f64,
    /// Words per sentence.
    pub avg_sentence_length: f64,
    pub gerund_ratio: f64,
    pub adjective_ratio: f64,
    pub pronoun_ratio: f64,
    pub flesch: f64,
    pub gulpease: f64,
    pub embedding_index: f64,
    pub center_embedding_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosRatios {
    pub gerund_ratio: f64,
    pub adjective_ratio: f64,
    pub pronoun_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingIndices {
    pub embedding_index: f64,
    pub center_embedding_index: f64,
}

/// Raw counts shared by every index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    words: usize,
    sentences: usize,
    letters: usize,
    syllables: usize,
    gerunds: usize,
    adjectives: usize,
    pronouns: usize,
    clauses: ClauseCounts,
}

fn count(text: &str, tagger: &dyn PosTagger, lexicons: &PosLexicons) -> Result<Counts, MetricsError> {
    let mut c = Counts::default();
    for sentence in split_sentences(text) {
        let mut any = false;
        for word in words(&sentence) {
            any = true;
            c.words += 1;
            c.letters += word.chars().count();
            c.syllables += count_syllables_it(word)?;
            match tagger.tag(&word.to_lowercase()) {
                PosTag::Gerund => c.gerunds += 1,
                PosTag::Adjective => c.adjectives += 1,
                PosTag::Pronoun => c.pronouns += 1,
                PosTag::Other => {}
            }
        }
        if any {
            c.sentences += 1;
            let clauses = sentence_clauses(&sentence, lexicons);
            c.clauses.embedded += clauses.embedded;
            c.clauses.center_embedded += clauses.center_embedded;
        }
    }
    if c.words == 0 || c.sentences == 0 {
        return Err(MetricsError::EmptyText);
    }
    Ok(c)
}

fn gulpease_of(c: &Counts) -> f64 {
    let raw = 89.0 + (300.0 * c.sentences as f64 - 10.0 * c.letters as f64) / c.words as f64;
    raw.clamp(0.0, 100.0)
}

fn flesch_of(c: &Counts, k: FleschCoefficients) -> f64 {
    k.c0 - k.c1 * (c.words as f64 / c.sentences as f64) - k.c2 * (c.syllables as f64 / c.words as f64)
}

fn ratio(n: usize, d: usize) -> f64 {
    n as f64 / d as f64
}

fn italian() -> &'static PosLexicons {
    static LEXICONS: std::sync::OnceLock<PosLexicons> = std::sync::OnceLock::new();
    LEXICONS.get_or_init(PosLexicons::italian)
}

pub fn gulpease(text: &str) -> Result<f64, MetricsError> {
    let lex = italian();
    Ok(gulpease_of(&count(text, lex, lex)?))
}

pub fn flesch(text: &str, coefficients: FleschCoefficients) -> Result<f64, MetricsError> {
    let lex = italian();
    Ok(flesch_of(&count(text, lex, lex)?, coefficients))
}

pub fn pos_ratios(text: &str, tagger: &dyn PosTagger) -> Result<PosRatios, MetricsError> {
    let c = count(text, tagger, italian())?;
    Ok(PosRatios {
        gerund_ratio: ratio(c.gerunds, c.words),
        adjective_ratio: ratio(c.adjectives, c.words),
        pronoun_ratio: ratio(c.pronouns, c.words),
    })
}

pub fn embedding_indices(text: &str, lexicons: &PosLexicons) -> Result<EmbeddingIndices, MetricsError> {
    let c = count(text, lexicons, lexicons)?;
    Ok(EmbeddingIndices {
        embedding_index: ratio(c.clauses.embedded, c.sentences),
        center_embedding_index: ratio(c.clauses.center_embedded, c.sentences),
    })
}

pub fn profile(text: &str, lexicons: &PosLexicons) -> Result<ReadabilityProfile, MetricsError> {
    profile_with(text, lexicons, lexicons, FleschCoefficients::default())
}

/// Profile with an explicit tagger and Flesch coefficients.
pub fn profile_with(
    text: &str,
    tagger: &dyn PosTagger,
    lexicons: &PosLexicons,
    coefficients: FleschCoefficients,
) -> Result<ReadabilityProfile, MetricsError> {
    let c = count(text, tagger, lexicons)?;
    Ok(ReadabilityProfile {
        word_count: c.words,
        sentence_count: c.sentences,
        letter_count: c.letters,
        syllable_count: c.syllables,
        avg_word_length: ratio(c.letters, c.words),
        avg_sentence_length: ratio(c.words, c.sentences),
        gerund_ratio: ratio(c.gerunds, c.words),
        adjective_ratio: ratio(c.adjectives, c.words),
        pronoun_ratio: ratio(c.pronouns, c.words),
        flesch: flesch_of(&c, coefficients),
        gulpease: gulpease_of(&c),
        embedding_index: ratio(c.clauses.embedded, c.sentences),
        center_embedding_index: ratio(c.clauses.center_embedded, c.sentences),
    })
}
