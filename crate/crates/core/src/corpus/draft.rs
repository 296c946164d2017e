use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::akn::parse_date;
use super::{CorpusError, DraftProposal};

/// Builds a draft from its text and key-value metadata (`title`, `draft_id`,
/// `proponent`, `submitted_date`). Without an explicit id, one is derived
/// from a SHA-256 digest of title and text.
pub fn parse_draft(text: &str, metadata: &BTreeMap<String, String>) -> Result<DraftProposal, CorpusError> {
    let get = |key: &str| metadata.get(key).map(|v| v.trim()).filter(|v| !v.is_empty());
    let title = get("title").unwrap_or_default().to_string();
    let text = text.trim().to_string();
    if title.is_empty() && text.is_empty() {
        return Err(CorpusError::EmptyDraft);
    }
    let submitted_date = get("submitted_date")
        .or_else(|| get("date"))
        .map(parse_date)
        .transpose()?;
    let draft_id = match get("draft_id").or_else(|| get("id")) {
        Some(id) => id.to_string(),
        None => content_id(&title, &text),
    };
    Ok(DraftProposal {
        draft_id,
        title,
        text,
        proponent: get("proponent").map(str::to_string),
        submitted_date,
    })
}

fn content_id(title: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(title.as_bytes());
    hasher.update([0x1f]);
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("draft-{hex}")
}

/// Reads a draft fixture: `key: value` header lines, a blank line, then the text.
pub fn parse_draft_file(path: &Path) -> Result<DraftProposal, CorpusError> {
    let source = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (header, body) = match source.split_once("\n\n") {
        Some((h, b)) if h.lines().all(|l| l.contains(':')) => (h, b),
        _ => ("", source.as_str()),
    };
    let metadata = header
        .lines()
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
        .collect();
    parse_draft(body, &metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn populates_fields() {
        let d = parse_draft("Testo della proposta...", &meta(&[("title", "Disciplina X")])).unwrap();
        assert_eq!(d.title, "Disciplina X");
        assert_eq!(d.text, "Testo della proposta...");
        assert!(d.draft_id.starts_with("draft-"));
        assert_eq!(d.proponent, None);
    }

    #[test]
    fn empty_draft() {
        assert!(matches!(parse_draft("", &meta(&[])), Err(CorpusError::EmptyDraft)));
        assert!(matches!(
            parse_draft("  ", &meta(&[("title", " ")])),
            Err(CorpusError::EmptyDraft)
        ));
    }

    #[test]
    fn id_is_deterministic() {
        let a = parse_draft("stesso testo", &meta(&[])).unwrap();
        let b = parse_draft("stesso testo", &meta(&[])).unwrap();
        let c = parse_draft("altro testo", &meta(&[])).unwrap();
        assert_eq!(a.draft_id, b.draft_id);
        assert_ne!(a.draft_id, c.draft_id);
        let explicit = parse_draft("x", &meta(&[("draft_id", "AC-1234")])).unwrap();
        assert_eq!(explicit.draft_id, "AC-1234");
    }

    #[test]
    fn reads_fixture_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        std::fs::write(
            &path,
            "title: Norme sul clima\nproponent: On. Rossi\nsubmitted_date: 2024-02-01\n\nArt. 1 Testo.\n",
        )
        .unwrap();
        let d = parse_draft_file(&path).unwrap();
        assert_eq!(d.title, "Norme sul clima");
        assert_eq!(d.proponent.as_deref(), Some("On. Rossi"));
        assert_eq!(d.submitted_date.unwrap().to_string(), "2024-02-01");
        assert_eq!(d.text, "Art. 1 Testo.");
    }
}
