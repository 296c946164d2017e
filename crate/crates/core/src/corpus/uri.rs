//! Canonical act identifiers.
//!
//! Every act is keyed by `/akn/{country}/act/{YYYY-MM-DD}/{number}`, with an
//! optional `#art_N` fragment for article-level targets. Paragraph fragments
//! (`#com_N`, `#par_N`) are dropped from the identifier and reported as the
//! reference's specificity instead.

use chrono::NaiveDate;

use super::CorpusError;

/// A normalized reference target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedUri {
    pub uri: String,
    pub specifies_paragraph: bool,
}

impl NormalizedUri {
    /// The law-level part of the identifier (article fragment removed).
    pub fn law_uri(&self) -> &str {
        law_part(&self.uri)
    }
}

/// Strips any `#...` fragment.
pub fn law_part(uri: &str) -> &str {
    uri.split('#').next().unwrap_or(uri)
}

/// Builds the identifier of an article of `law_id`.
pub fn article_id(law_id: &str, number: &str) -> String {
    format!("{law_id}#art_{number}")
}

/// Normalizes an AKN-style href.
///
/// Accepts absolute URLs (the host is discarded), trailing slashes and mixed
/// case in the fixed segments. Version/expression suffixes such as `!main` or
/// `@2020-01-01` on the number are ignored.
pub fn normalize_uri(raw_href: &str) -> Result<NormalizedUri, CorpusError> {
    let unparsable = || CorpusError::UnparsableHref(raw_href.to_string());
    let trimmed = raw_href.trim();
    if trimmed.is_empty() {
        return Err(unparsable());
    }

    let (path, fragments) = match trimmed.find('#') {
        Some(pos) => (&trimmed[..pos], &trimmed[pos + 1..]),
        None => (trimmed, ""),
    };

    // Drop a scheme and host if present.
    let path = match path.find("://") {
        Some(pos) => {
            let rest = &path[pos + 3..];
            match rest.find('/') {
                Some(slash) => &rest[slash..],
                None => return Err(unparsable()),
            }
        }
        None => path,
    };

    let segments: Vec<&str> = path
        .trim_end_matches('/')
        .split('/')
        .filter(|s| !s.is_empty())
        .collect();
    let [akn, country, act, date, number] = segments.as_slice() else {
        return Err(unparsable());
    };
    if !akn.eq_ignore_ascii_case("akn") || !act.eq_ignore_ascii_case("act") {
        return Err(unparsable());
    }
    let country = country.to_ascii_lowercase();
    if country.is_empty() || !country.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(unparsable());
    }
    if NaiveDate::parse_from_str(date, "%Y-%m-%d").is_err() {
        return Err(unparsable());
    }
    let number = number
        .split(['!', '@', '~'])
        .next()
        .unwrap_or_default()
        .to_ascii_lowercase();
    if number.is_empty()
        || !number
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(unparsable());
    }

    let mut uri = format!("/akn/{country}/act/{date}/{number}");
    let mut specifies_paragraph = false;
    let mut article: Option<String> = None;
    for fragment in fragments.split('#').map(str::trim).filter(|f| !f.is_empty()) {
        let lower = fragment.to_ascii_lowercase();
        // eIds can be compound, e.g. "art_4__para_2".
        for part in lower.split("__") {
            if let Some(n) = part.strip_prefix("art_") {
                if article.is_none() && is_unit_label(n) {
                    article = Some(n.to_string());
                }
            } else if ["com_", "par_", "para_"]
                .iter()
                .any(|p| part.strip_prefix(p).is_some_and(is_unit_label))
            {
                specifies_paragraph = true;
            }
        }
    }
    if let Some(n) = article {
        uri.push_str("#art_");
        uri.push_str(&n);
    }
    Ok(NormalizedUri {
        uri,
        specifies_paragraph,
    })
}

fn is_unit_label(label: &str) -> bool {
    !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}
