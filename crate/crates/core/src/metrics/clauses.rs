//! Clause embedding counts.
//!
//! A sentence is split at commas into spans; parenthesized groups open
//! nested spans that are split the same way. A span is embedded when its
//! first word is a subordinator, and center-embedded when it additionally
//! neither starts at its parent span's first word nor ends at its last.

use super::lexicon::PosLexicons;
use super::tokenize::words;

#[derive(Debug)]
enum Item {
    Word(usize),
    Comma,
    Group(Vec<Item>),
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ClauseCounts {
    pub embedded: usize,
    pub center_embedded: usize,
}

/// Word positions covered by a run of items.
fn range(items: &[Item]) -> Option<(usize, usize)> {
    let mut first = None;
    let mut last = None;
    for item in items {
        let r = match item {
            Item::Word(i) => Some((*i, *i)),
            Item::Group(inner) => range(inner),
            Item::Comma => None,
        };
        if let Some((a, b)) = r {
            first.get_or_insert(a);
            last = Some(b);
        }
    }
    first.zip(last)
}

fn parse(sentence: &str) -> (Vec<Item>, Vec<String>) {
    let mut stack: Vec<Vec<Item>> = vec![Vec::new()];
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, stack: &mut Vec<Vec<Item>>, tokens: &mut Vec<String>| {
        if !word.is_empty() {
            tokens.push(word.to_lowercase());
            stack.last_mut().expect("root").push(Item::Word(tokens.len() - 1));
            word.clear();
        }
    };
    for c in sentence.chars() {
        if c.is_alphabetic() {
            word.push(c);
            continue;
        }
        flush(&mut word, &mut stack, &mut tokens);
        match c {
            ',' => stack.last_mut().expect("root").push(Item::Comma),
            '(' | '[' => stack.push(Vec::new()),
            ')' | ']' if stack.len() > 1 => {
                let group = stack.pop().expect("group");
                stack.last_mut().expect("root").push(Item::Group(group));
            }
            _ => {}
        }
    }
    flush(&mut word, &mut stack, &mut tokens);
    while stack.len() > 1 {
        let group = stack.pop().expect("group");
        stack.last_mut().expect("root").push(Item::Group(group));
    }
    (stack.pop().expect("root"), tokens)
}

struct Counter<'a> {
    tokens: &'a [String],
    lexicons: &'a PosLexicons,
    counts: ClauseCounts,
}

impl Counter<'_> {
    fn classify(&mut self, child: (usize, usize), parent: (usize, usize)) {
        if !self.lexicons.is_subordinator(&self.tokens[child.0]) {
            return;
        }
        self.counts.embedded += 1;
        if child.0 != parent.0 && child.1 != parent.1 {
            self.counts.center_embedded += 1;
        }
    }

    fn span(&mut self, items: &[Item]) {
        let Some(own) = range(items) else { return };
        let segments: Vec<&[Item]> = items.split(|i| matches!(i, Item::Comma)).collect();
        if segments.len() > 1 {
            for segment in segments {
                if let Some(r) = range(segment) {
                    self.classify(r, own);
                    self.groups(segment, r);
                }
            }
        } else {
            self.groups(items, own);
        }
    }

    fn groups(&mut self, segment: &[Item], parent: (usize, usize)) {
        for item in segment {
            if let Item::Group(inner) = item {
                if let Some(r) = range(inner) {
                    self.classify(r, parent);
                    self.span(inner);
                }
            }
        }
    }
}

/// Embedded and center-embedded span counts for one sentence.
pub fn sentence_clauses(sentence: &str, lexicons: &PosLexicons) -> ClauseCounts {
    let (items, tokens) = parse(sentence);
    debug_assert_eq!(tokens.len(), words(sentence).count());
    let mut counter = Counter {
        tokens: &tokens,
        lexicons,
        counts: ClauseCounts::default(),
    };
    counter.span(&items);
    counter.counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(s: &str) -> (usize, usize) {
        let c = sentence_clauses(s, &PosLexicons::italian());
        (c.embedded, c.center_embedded)
    }

    #[test]
    fn relative_clause_in_the_middle() {
        assert_eq!(
            counts("Il decreto, che disciplina i contratti, entra in vigore."),
            (1, 1)
        );
    }

    #[test]
    fn no_subordinators() {
        assert_eq!(counts("Il decreto entra in vigore."), (0, 0));
    }

    #[test]
    fn trailing_clause_is_not_centered() {
        assert_eq!(counts("Si applica la norma, che deroga."), (1, 0));
    }

    #[test]
    fn leading_clause_is_not_centered() {
        assert_eq!(counts("Quando la legge entra in vigore, si applica."), (1, 0));
    }

    #[test]
    fn parenthetical_nesting() {
        // The parenthesis sits inside the first comma segment, which ends at "norma".
        assert_eq!(counts("La norma (che deroga al codice) resta, e si applica."), (1, 1));
        // A comma inside the group splits it; "cui" starts the second inner span,
        // which ends the group.
        assert_eq!(counts("Il testo (art. 2, cui si rinvia) vale."), (1, 0));
        // Unclosed group runs to the end of the sentence.
        assert_eq!(counts("Il testo (che vale"), (1, 0));
    }

    #[test]
    fn empty_sentence() {
        assert_eq!(counts(", ( ) ,"), (0, 0));
    }
}
