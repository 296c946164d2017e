//! Akoma Ntoso subset reader.
//!
//! Interpreted elements: `FRBRWork/FRBRuri`, `FRBRWork/FRBRdate`, `keyword`,
//! `docTitle`, `preamble`, `body`, `article` (`num`, `heading`, content) and
//! `ref`. Everything else is descended into transparently.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::uri::{article_id, normalize_uri};
use super::{
    article_label, compare_article_numbers, squash_whitespace, Abrogation, ArticleUnit, CorpusError, LawDocument,
    RawReference, RefKind,
};

/// Inline elements do not break words when their text is joined.
const INLINE: &[&str] = &[
    "ref",
    "mref",
    "rref",
    "i",
    "b",
    "u",
    "sup",
    "sub",
    "span",
    "a",
    "date",
    "term",
    "inline",
    "def",
    "entity",
    "abbr",
    "docNumber",
    "docDate",
    "docType",
    "docProponent",
    "shortTitle",
];

#[derive(Default)]
struct ArticleDraft {
    eid: Option<String>,
    num: String,
    heading: String,
    text: String,
    refs: Vec<PendingRef>,
}

struct PendingRef {
    href: String,
    kind: RefKind,
    abrogation: Option<Option<String>>,
}

#[derive(Default)]
struct State {
    stack: Vec<String>,
    frbr_uri: Option<String>,
    frbr_this: Option<String>,
    frbr_date: Option<String>,
    keywords: Vec<(Option<String>, String)>,
    keyword_text: Option<String>,
    keyword_dictionary: Option<String>,
    title: String,
    title_done: bool,
    preamble_text: String,
    preamble_refs: Vec<PendingRef>,
    body_refs: Vec<PendingRef>,
    articles: Vec<ArticleDraft>,
    current_article: Option<ArticleDraft>,
}

impl State {
    fn within(&self, name: &str) -> bool {
        self.stack.iter().any(|s| s == name)
    }

    fn parent_is(&self, name: &str) -> bool {
        self.stack.len() >= 2 && self.stack[self.stack.len() - 2] == name
    }

    fn push_text(&mut self, text: &str) {
        if self.keyword_text.is_some() {
            if let Some(buf) = self.keyword_text.as_mut() {
                buf.push_str(text);
            }
            return;
        }
        if self.within("meta") {
            return;
        }
        if self.within("docTitle") && !self.title_done {
            self.title.push_str(text);
        }
        if let Some(article) = self.current_article.as_mut() {
            // Only `num` and `heading` directly under the article label it;
            // nested ones (paragraph numbers) are dropped from the text.
            let inner = self
                .stack
                .iter()
                .rposition(|s| s == "article")
                .map_or(&[][..], |i| &self.stack[i + 1..]);
            match inner.first().map(String::as_str) {
                Some("num") => article.num.push_str(text),
                Some("heading") => article.heading.push_str(text),
                _ if inner.iter().any(|s| s == "num") => {}
                _ => article.text.push_str(text),
            }
        } else if self.within("preamble") {
            self.preamble_text.push_str(text);
        }
    }

    fn boundary(&mut self, name: &str) {
        if INLINE.contains(&name) {
            return;
        }
        self.push_text(" ");
    }

    fn open(&mut self, e: &BytesStart<'_>) -> Result<(), CorpusError> {
        let name = local_name(e);
        self.boundary(&name);
        self.stack.push(name.clone());
        let attrs = attributes(e)?;
        match name.as_str() {
            "FRBRuri" if self.parent_is("FRBRWork") && self.frbr_uri.is_none() => {
                self.frbr_uri = attrs.get("value").cloned();
            }
            "FRBRthis" if self.parent_is("FRBRWork") && self.frbr_this.is_none() => {
                self.frbr_this = attrs.get("value").cloned();
            }
            "FRBRdate" if self.parent_is("FRBRWork") && self.frbr_date.is_none() => {
                self.frbr_date = attrs.get("date").cloned();
            }
            "keyword" if self.within("meta") => {
                let value = attrs
                    .get("value")
                    .or_else(|| attrs.get("showAs"))
                    .cloned()
                    .unwrap_or_default();
                self.keyword_dictionary = attrs.get("dictionary").cloned();
                self.keyword_text = Some(value);
            }
            "article" if self.within("body") && self.current_article.is_none() => {
                self.current_article = Some(ArticleDraft {
                    eid: attrs.get("eId").or_else(|| attrs.get("id")).cloned(),
                    ..Default::default()
                });
            }
            "ref" => {
                if let Some(href) = attrs.get("href") {
                    let abrogation = match attrs.get("role").map(String::as_str) {
                        Some("abrogates" | "abrogation" | "abroga") => Some(attrs.get("date").cloned()),
                        _ => None,
                    };
                    let pending = |kind| PendingRef {
                        href: href.clone(),
                        kind,
                        abrogation: abrogation.clone(),
                    };
                    if self.within("preamble") {
                        self.preamble_refs.push(pending(RefKind::Preamble));
                    } else if let Some(article) = self.current_article.as_mut() {
                        article.refs.push(pending(RefKind::Body));
                    } else if self.within("body") {
                        self.body_refs.push(pending(RefKind::Body));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn close(&mut self, name: &str) -> Result<(), CorpusError> {
        match self.stack.pop() {
            Some(open) if open == name => {}
            Some(open) => {
                return Err(CorpusError::MalformedXml(format!(
                    "expected </{open}>, found </{name}>"
                )))
            }
            None => return Err(CorpusError::MalformedXml(format!("unexpected </{name}>"))),
        }
        match name {
            "keyword" => {
                if let Some(value) = self.keyword_text.take() {
                    let value = squash_whitespace(&value);
                    if !value.is_empty() {
                        self.keywords.push((self.keyword_dictionary.take(), value));
                    }
                }
            }
            "docTitle" if !self.title.trim().is_empty() => self.title_done = true,
            "article" if !self.within("article") => {
                if let Some(article) = self.current_article.take() {
                    self.articles.push(article);
                }
            }
            _ => {}
        }
        self.boundary(name);
        Ok(())
    }
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).into_owned()
}

fn attributes(e: &BytesStart<'_>) -> Result<BTreeMap<String, String>, CorpusError> {
    let mut out = BTreeMap::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| CorpusError::MalformedXml(err.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.local_name().as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|err| CorpusError::MalformedXml(err.to_string()))?
            .into_owned();
        out.insert(key, value);
    }
    Ok(out)
}

/// Parses one AKN act.
pub fn parse_akn_document(xml: &[u8]) -> Result<LawDocument, CorpusError> {
    let mut reader = Reader::from_reader(xml);
    reader.config_mut().trim_text(false);
    let mut state = State::default();
    let mut saw_root = false;
    let mut buf = Vec::new();

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| CorpusError::MalformedXml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(e) => {
                saw_root = true;
                state.open(&e)?;
            }
            Event::Empty(e) => {
                saw_root = true;
                let name = local_name(&e);
                state.open(&e)?;
                state.close(&name)?;
            }
            Event::End(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                state.close(&name)?;
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| CorpusError::MalformedXml(e.to_string()))?;
                state.push_text(&text);
            }
            Event::CData(c) => {
                let text = String::from_utf8_lossy(&c).into_owned();
                state.push_text(&text);
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !saw_root {
        return Err(CorpusError::MalformedXml("no root element".into()));
    }
    if let Some(open) = state.stack.last() {
        return Err(CorpusError::MalformedXml(format!("unclosed <{open}> at end of input")));
    }
    finish(state)
}

fn finish(state: State) -> Result<LawDocument, CorpusError> {
    let raw_id = state
        .frbr_uri
        .or(state.frbr_this)
        .ok_or(CorpusError::MissingIdentifier)?;
    let law_id = normalize_uri(&raw_id)
        .map_err(|_| CorpusError::MissingIdentifier)?
        .law_uri()
        .to_string();

    let publication_date = match state.frbr_date.as_deref() {
        Some(raw) => parse_date(raw)?,
        None => {
            // Fall back to the date segment of the identifier.
            let date = law_id.split('/').nth(4).unwrap_or_default();
            parse_date(date)?
        }
    };

    let ministry_domain = state
        .keywords
        .iter()
        .find(|(dict, _)| {
            dict.as_deref()
                .is_some_and(|d| d.eq_ignore_ascii_case("ministry") || d.eq_ignore_ascii_case("ministero"))
        })
        .or_else(|| state.keywords.first())
        .map(|(_, v)| v.clone());

    let title = squash_whitespace(&state.title);

    let mut abrogations = Vec::new();
    let mut resolve = |pending: PendingRef, source: &str| -> Option<RawReference> {
        let normalized = match normalize_uri(&pending.href) {
            Ok(n) => n,
            Err(_) => {
                log::debug!("skipping unparsable href {:?} in {source}", pending.href);
                return None;
            }
        };
        if let Some(date) = pending.abrogation {
            let effective_date = date
                .as_deref()
                .and_then(|d| parse_date(d).ok())
                .unwrap_or(publication_date);
            let target_uri = normalized.law_uri().to_string();
            if target_uri != law_id && !abrogations.iter().any(|a: &Abrogation| a.target_uri == target_uri) {
                abrogations.push(Abrogation {
                    target_uri,
                    effective_date,
                });
            }
        }
        Some(RawReference {
            source_unit: source.to_string(),
            target_uri: normalized.uri,
            kind: pending.kind,
            specifies_paragraph: normalized.specifies_paragraph,
            raw_href: pending.href,
        })
    };

    let preamble_refs: Vec<RawReference> = state
        .preamble_refs
        .into_iter()
        .filter_map(|p| resolve(p, &law_id))
        .collect();
    let mut body_refs: Vec<RawReference> = state
        .body_refs
        .into_iter()
        .filter_map(|p| resolve(p, &law_id))
        .collect();

    let mut articles = Vec::with_capacity(state.articles.len());
    let mut seen = std::collections::BTreeSet::new();
    for (position, draft) in state.articles.into_iter().enumerate() {
        let number = article_label(&draft.num)
            .or_else(|| draft.eid.as_deref().and_then(article_label))
            .unwrap_or_else(|| (position + 1).to_string());
        if !seen.insert(number.clone()) {
            log::debug!("duplicate article {number} in {law_id}; keeping the first");
            continue;
        }
        let id = article_id(&law_id, &number);
        let heading = Some(squash_whitespace(&draft.heading)).filter(|h| !h.is_empty());
        let text = squash_whitespace(&draft.text);
        body_refs.extend(draft.refs.into_iter().filter_map(|p| resolve(p, &id)));
        articles.push(ArticleUnit {
            article_id: id,
            number,
            heading,
            text,
        });
    }
    articles.sort_by(|a, b| compare_article_numbers(&a.number, &b.number));

    let mut parts = vec![title.clone(), squash_whitespace(&state.preamble_text)];
    for article in &articles {
        if let Some(h) = &article.heading {
            parts.push(h.clone());
        }
        parts.push(article.text.clone());
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
        ministry_domain,
        articles,
        preamble_refs,
        body_refs,
        abrogations,
        full_text,
    })
}

pub(crate) fn parse_date(raw: &str) -> Result<NaiveDate, CorpusError> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| CorpusError::InvalidDate(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r##"<?xml version="1.0" encoding="UTF-8"?>
<akomaNtoso xmlns="http://docs.oasis-open.org/legaldocml/ns/akn/3.0">
  <act name="legge">
    <meta>
      <identification source="#source">
        <FRBRWork>
          <FRBRthis value="/akn/it/act/2005-06-01/7/!main"/>
          <FRBRuri value="/akn/it/act/2005-06-01/7"/>
          <FRBRdate date="2005-06-01" name="emanazione"/>
        </FRBRWork>
      </identification>
    </meta>
    <preface><p><docTitle>Legge minima</docTitle></p></preface>
    <preamble><p>Visto il <ref href="/akn/it/act/2000-01-01/1">decreto</ref>;</p></preamble>
    <body>
      <article eId="art_1">
        <num>Art. 1</num>
        <content><p>Testo unico.</p></content>
      </article>
    </body>
  </act>
</akomaNtoso>"##;

    #[test]
    fn minimal_act() {
        let doc = parse_akn_document(MINIMAL.as_bytes()).unwrap();
        assert_eq!(doc.law_id, "/akn/it/act/2005-06-01/7");
        assert_eq!(doc.title, "Legge minima");
        assert_eq!(doc.publication_date, NaiveDate::from_ymd_opt(2005, 6, 1).unwrap());
        assert_eq!(doc.articles.len(), 1);
        assert_eq!(doc.articles[0].article_id, "/akn/it/act/2005-06-01/7#art_1");
        assert_eq!(doc.articles[0].text, "Testo unico.");
        assert_eq!(doc.preamble_refs.len(), 1);
        let r = &doc.preamble_refs[0];
        assert_eq!(r.target_uri, "/akn/it/act/2000-01-01/1");
        assert_eq!(r.kind, RefKind::Preamble);
        assert!(!r.specifies_paragraph);
        assert_eq!(r.source_unit, doc.law_id);
        assert!(doc.body_refs.is_empty());
        assert_eq!(doc.ministry_domain, None);
    }

    #[test]
    fn paragraph_numbers_do_not_leak() {
        let xml = MINIMAL.replace(
            "<content><p>Testo unico.</p></content>",
            r#"<paragraph eId="art_1__para_1"><num>1.</num><content><p>Primo.</p></content></paragraph>
               <paragraph eId="art_1__para_2"><num>2.</num><content><p>Secondo.</p></content></paragraph>"#,
        );
        let doc = parse_akn_document(xml.as_bytes()).unwrap();
        assert_eq!(doc.articles[0].number, "1");
        assert_eq!(doc.articles[0].text, "Primo. Secondo.");
    }

    #[test]
    fn act_without_refs() {
        let xml = MINIMAL.replace(r#"<ref href="/akn/it/act/2000-01-01/1">decreto</ref>"#, "decreto");
        let doc = parse_akn_document(xml.as_bytes()).unwrap();
        assert!(doc.preamble_refs.is_empty());
        assert!(doc.body_refs.is_empty());
    }

    #[test]
    fn truncated_xml_is_malformed() {
        let cut = &MINIMAL[..MINIMAL.find("</body>").unwrap()];
        assert!(matches!(
            parse_akn_document(cut.as_bytes()),
            Err(CorpusError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_akn_document(b"<a><b></a>"),
            Err(CorpusError::MalformedXml(_))
        ));
        assert!(matches!(parse_akn_document(b""), Err(CorpusError::MalformedXml(_))));
    }

    #[test]
    fn missing_identifier() {
        let xml = MINIMAL
            .replace(r#"<FRBRthis value="/akn/it/act/2005-06-01/7/!main"/>"#, "")
            .replace(r#"<FRBRuri value="/akn/it/act/2005-06-01/7"/>"#, "");
        assert!(matches!(
            parse_akn_document(xml.as_bytes()),
            Err(CorpusError::MissingIdentifier)
        ));
    }

    #[test]
    fn body_refs_ministry_and_abrogation() {
        let xml = r#"<akomaNtoso><act>
          <meta>
            <identification><FRBRWork><FRBRuri value="/akn/it/act/2012-02-02/9"/></FRBRWork></identification>
            <classification>
              <keyword value="energia" dictionary="topic"/>
              <keyword value="Ministero dello sviluppo economico" dictionary="ministry"/>
            </classification>
            <unknownMeta>ignored</unknownMeta>
          </meta>
          <preface><docTitle>Norme</docTitle></preface>
          <body>
            <chapter><num>Capo I</num>
            <article eId="art_2"><num>Art. 2</num><heading>Abrogazioni</heading>
              <paragraph><content><p>È abrogata la <ref href="/akn/it/act/2001-01-01/3" role="abrogates" date="2012-03-01">legge</ref>.
              Si veda l'<ref href="/akn/it/act/2001-01-01/4#art_5#com_1">art. 5</ref>.</p></content></paragraph>
            </article>
            <article eId="art_1"><num>Art. 1</num><content><p>Oggetto <i>della</i> legge.</p></content></article>
            </chapter>
            <ref href="not-an-act">x</ref>
          </body>
        </act></akomaNtoso>"#;
        let doc = parse_akn_document(xml.as_bytes()).unwrap();
        assert_eq!(
            doc.ministry_domain.as_deref(),
            Some("Ministero dello sviluppo economico")
        );
        assert_eq!(doc.publication_date, NaiveDate::from_ymd_opt(2012, 2, 2).unwrap());
        let numbers: Vec<_> = doc.articles.iter().map(|a| a.number.as_str()).collect();
        assert_eq!(numbers, vec!["1", "2"]);
        assert_eq!(doc.articles[0].text, "Oggetto della legge.");
        assert_eq!(doc.articles[1].heading.as_deref(), Some("Abrogazioni"));
        assert_eq!(doc.body_refs.len(), 2);
        assert!(doc.body_refs.iter().all(|r| r.kind == RefKind::Body));
        assert!(doc
            .body_refs
            .iter()
            .all(|r| r.source_unit == "/akn/it/act/2012-02-02/9#art_2"));
        assert!(doc.body_refs[1].specifies_paragraph);
        assert_eq!(doc.body_refs[1].target_uri, "/akn/it/act/2001-01-01/4#art_5");
        assert_eq!(
            doc.abrogations,
            vec![Abrogation {
                target_uri: "/akn/it/act/2001-01-01/3".into(),
                effective_date: NaiveDate::from_ymd_opt(2012, 3, 1).unwrap(),
            }]
        );
        assert!(doc.full_text.starts_with("Norme\nOggetto della legge."));
    }
}
