use super::MetricsError;

const TERMINATORS: [char; 4] = ['.', '!', '?', ';'];

/// Tokens ending in a period that do not close a sentence.
const ABBREVIATIONS: &[&str] = &[
    "art.", "artt.", "n.", "nn.", "co.", "d.lgs.", "d.l.", "d.p.r.", "d.m.", "l.", "lett.", "cfr.", "ecc.", "pag.",
    "sig.", "dott.", "on.", "prof.", "cost.", "c.c.", "c.p.", "g.u.", "reg.", "dir.", "s.m.i.", "cd.", "c.d.",
    "rispett.",
];

/// Splits on `.`, `!`, `?` and `;` followed by whitespace or end of text.
/// Known abbreviations (`art.`, `n.`, `d.lgs.`, ...) do not split, and a
/// period inside a number never does since no whitespace follows it.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i].1;
        if !TERMINATORS.contains(&c) {
            i += 1;
            continue;
        }
        // Swallow a run like "?!" or "...".
        let mut j = i;
        while j + 1 < chars.len() && TERMINATORS.contains(&chars[j + 1].1) {
            j += 1;
        }
        let end = chars[j].0 + chars[j].1.len_utf8();
        let at_boundary = j + 1 == chars.len() || chars[j + 1].1.is_whitespace();
        if at_boundary && !(c == '.' && j == i && is_abbreviation(&text[..end])) {
            push_trimmed(&mut sentences, &text[start..end]);
            start = end;
        }
        i = j + 1;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

/// Whether the whitespace-delimited token ending `prefix` is an abbreviation.
fn is_abbreviation(prefix: &str) -> bool {
    let token = prefix
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or_default()
        .rsplit(['\'', '’'])
        .next()
        .unwrap_or_default()
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Maximal runs of alphabetic characters. Apostrophes split clitics:
/// `dell'arte` gives `dell` and `arte`.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty())
}

fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e'
            | 'i'
            | 'o'
            | 'u'
            | 'à'
            | 'á'
            | 'â'
            | 'è'
            | 'é'
            | 'ê'
            | 'ì'
            | 'í'
            | 'î'
            | 'ò'
            | 'ó'
            | 'ô'
            | 'ù'
            | 'ú'
            | 'û'
    )
}

/// Counts vowel groups, at least one per word. Diphthongs and hiatuses are
/// not distinguished, so `aiuola` counts 2 rather than the 4 of true
/// hyphenation.
pub fn count_syllables_it(word: &str) -> Result<usize, MetricsError> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return Err(MetricsError::NoLetters);
    }
    let mut groups = 0;
    let mut in_group = false;
    for c in letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    Ok(groups.max(1))
}
