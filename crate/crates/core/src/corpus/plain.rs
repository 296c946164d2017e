//! Plain-text acts.
//!
//! ```text
//! law_id: /akn/it/act/2003-05-10/41
//! title: Disposizioni in materia di energia
//! date: 2003-05-10
//! ministry: Ministero dello sviluppo economico
//! abrogates: /akn/it/act/1999-01-01/2 2003-06-01
//!
//! Visto il [decreto legislativo n. 79](/akn/it/act/1999-03-16/79);
//! Art. 1 - Oggetto
//! La presente legge disciplina ...
//! ```
//!
//! Header lines run until the first blank line. Lines before the first
//! `Art. N` marker form the preamble. References use `[label](href)`; the label
//! stays in the text.

use std::sync::OnceLock;

use regex::Regex;

use super::akn::parse_date;
use super::uri::{article_id, normalize_uri};
use super::{
    article_label, compare_article_numbers, squash_whitespace, Abrogation, ArticleUnit, CorpusError, LawDocument,
    RawReference, RefKind,
};

fn article_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*(?:art\.|articolo)\s*(\d+(?:[- ]?[a-z]+)?)\.?\s*(?:[-–:]\s*(.*))?$").unwrap()
    })
}

fn link() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[([^\]]*)\]\(([^)\s]+)\)").unwrap())
}

/// Replaces `[label](href)` with `label`, returning the hrefs in order.
fn strip_links(line: &str) -> (String, Vec<String>) {
    let mut hrefs = Vec::new();
    let text = link().replace_all(line, |caps: &regex::Captures<'_>| {
        hrefs.push(caps[2].to_string());
        caps[1].to_string()
    });
    (text.into_owned(), hrefs)
}

pub fn parse_plain_document(source: &str) -> Result<LawDocument, CorpusError> {
    let mut lines = source.lines();
    let mut law_id = None;
    let mut title = String::new();
    let mut date = None;
    let mut ministry = None;
    let mut abrogates = Vec::new();
    for line in lines.by_ref() {
        if line.trim().is_empty() {
            break;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim().to_ascii_lowercase().as_str() {
            "law_id" | "id" => law_id = Some(value.to_string()),
            "title" => title = value.to_string(),
            "date" => date = Some(parse_date(value)?),
            "ministry" => ministry = Some(value.to_string()).filter(|v| !v.is_empty()),
            "abrogates" => abrogates.push(value.to_string()),
            _ => {}
        }
    }
    let law_id = normalize_uri(law_id.as_deref().ok_or(CorpusError::MissingIdentifier)?)
        .map_err(|_| CorpusError::MissingIdentifier)?
        .law_uri()
        .to_string();
    let publication_date = match date {
        Some(d) => d,
        None => parse_date(law_id.split('/').nth(4).unwrap_or_default())?,
    };

    let mut preamble = String::new();
    let mut preamble_hrefs = Vec::new();
    // (number, heading, text, hrefs)
    let mut articles: Vec<(String, Option<String>, String, Vec<String>)> = Vec::new();
    for line in lines {
        if let Some(caps) = article_marker().captures(line) {
            let number = article_label(&caps[1]).unwrap_or_else(|| (articles.len() + 1).to_string());
            let heading = caps.get(2).map(|m| strip_links(m.as_str()));
            let (heading, hrefs) = match heading {
                Some((h, hrefs)) => (Some(squash_whitespace(&h)).filter(|h| !h.is_empty()), hrefs),
                None => (None, Vec::new()),
            };
            articles.push((number, heading, String::new(), hrefs));
            continue;
        }
        let (text, hrefs) = strip_links(line);
        match articles.last_mut() {
            Some((_, _, body, refs)) => {
                body.push_str(&text);
                body.push('\n');
                refs.extend(hrefs);
            }
            None => {
                preamble.push_str(&text);
                preamble.push('\n');
                preamble_hrefs.extend(hrefs);
            }
        }
    }

    let reference = |href: String, source: &str, kind| -> Option<RawReference> {
        let n = normalize_uri(&href).ok()?;
        Some(RawReference {
            source_unit: source.to_string(),
            target_uri: n.uri,
            kind,
            specifies_paragraph: n.specifies_paragraph,
            raw_href: href,
        })
    };

    let preamble_refs = preamble_hrefs
        .into_iter()
        .filter_map(|h| reference(h, &law_id, RefKind::Preamble))
        .collect();
    let mut body_refs = Vec::new();
    let mut units = Vec::new();
    for (number, heading, text, hrefs) in articles {
        if units.iter().any(|u: &ArticleUnit| u.number == number) {
            continue;
        }
        let id = article_id(&law_id, &number);
        body_refs.extend(hrefs.into_iter().filter_map(|h| reference(h, &id, RefKind::Body)));
        units.push(ArticleUnit {
            article_id: id,
            number,
            heading,
            text: squash_whitespace(&text),
        });
    }
    units.sort_by(|a, b| compare_article_numbers(&a.number, &b.number));

    let mut abrogations = Vec::new();
    for entry in abrogates {
        let mut parts = entry.split_whitespace();
        let target = parts.next().unwrap_or_default();
        let target = normalize_uri(target)?.law_uri().to_string();
        let effective_date = match parts.next() {
            Some(d) => parse_date(d)?,
            None => publication_date,
        };
        abrogations.push(Abrogation {
            target_uri: target,
            effective_date,
        });
    }

    let title = squash_whitespace(&title);
    let mut parts = vec![title.clone(), squash_whitespace(&preamble)];
    for unit in &units {
        if let Some(h) = &unit.heading {
            parts.push(h.clone());
        }
        parts.push(unit.text.clone());
    }
    let full_text = parts
        .into_iter()
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("\n");

    Ok(LawDocument {
        law_id,
        title,
        publication_date,
        ministry_domain: ministry,
        articles: units,
        preamble_refs,
        body_refs,
        abrogations,
        full_text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_preamble_and_articles() {
        let src = "law_id: /akn/it/act/2003-05-10/41\n\
                   title: Disposizioni sull'energia\n\
                   ministry: Ministero dello sviluppo economico\n\
                   abrogates: /akn/it/act/1999-01-01/2 2003-06-01\n\
                   \n\
                   Visto il [decreto n. 79](/akn/it/act/1999-03-16/79);\n\
                   Art. 1 - Oggetto\n\
                   La legge disciplina gli [impianti](/akn/it/act/1999-03-16/79#art_2#com_1).\n\
                   Art. 2\n\
                   Entra in vigore oggi.\n";
        let doc = parse_plain_document(src).unwrap();
        assert_eq!(doc.law_id, "/akn/it/act/2003-05-10/41");
        assert_eq!(doc.publication_date.to_string(), "2003-05-10");
        assert_eq!(doc.articles.len(), 2);
        assert_eq!(doc.articles[0].heading.as_deref(), Some("Oggetto"));
        assert_eq!(doc.articles[0].text, "La legge disciplina gli impianti.");
        assert_eq!(doc.preamble_refs.len(), 1);
        assert_eq!(doc.body_refs.len(), 1);
        assert!(doc.body_refs[0].specifies_paragraph);
        assert_eq!(doc.body_refs[0].source_unit, "/akn/it/act/2003-05-10/41#art_1");
        assert_eq!(doc.abrogations.len(), 1);
        assert_eq!(doc.abrogations[0].effective_date.to_string(), "2003-06-01");
    }

    #[test]
    fn requires_identifier() {
        assert!(matches!(
            parse_plain_document("title: x\n\nArt. 1\ntesto\n"),
            Err(CorpusError::MissingIdentifier)
        ));
    }
}
