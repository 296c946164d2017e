use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_akn_document, parse_plain_document, CorpusError, LawDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceFormat {
    #[serde(rename = "akn-xml")]
    AknXml,
    #[serde(rename = "text")]
    Text,
}

/// One manifest line: `{"path": "...", "format": "akn-xml" | "text"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: PathBuf,
    pub format: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub parsed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestFailure {
    pub line: usize,
    pub path: Option<PathBuf>,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct CorpusScan {
    /// Parsed documents in manifest order.
    pub documents: Vec<LawDocument>,
    pub failures: Vec<IngestFailure>,
    pub stats: IngestStats,
}

enum Outcome {
    Parsed(LawDocument),
    Failed(IngestFailure),
    Skipped,
}

/// Parses every file listed in the manifest. Relative paths resolve against
/// the manifest's directory. Per-file failures are recorded and never abort
/// the scan; only a missing manifest is an error.
pub fn scan_corpus(manifest: &Path) -> Result<CorpusScan, CorpusError> {
    let source = std::fs::read_to_string(manifest).map_err(|err| match err.kind() {
        std::io::ErrorKind::NotFound => CorpusError::ManifestNotFound(manifest.to_path_buf()),
        _ => CorpusError::Io {
            path: manifest.to_path_buf(),
            source: err,
        },
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));

    let lines: Vec<(usize, &str)> = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();

    let outcomes: Vec<Outcome> = lines
        .par_iter()
        .map(|&(line, raw)| load_record(base, line, raw))
        .collect();

    let mut scan = CorpusScan::default();
    let mut seen = BTreeSet::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Parsed(doc) => {
                if seen.insert(doc.law_id.clone()) {
                    scan.stats.parsed += 1;
                    scan.documents.push(doc);
                } else {
                    scan.stats.failed += 1;
                    scan.failures.push(IngestFailure {
                        line: 0,
                        path: None,
                        message: format!("duplicate law id {}", doc.law_id),
                    });
                }
            }
            Outcome::Failed(f) => {
                log::warn!("manifest line {}: {}", f.line, f.message);
                scan.stats.failed += 1;
                scan.failures.push(f);
            }
            Outcome::Skipped => scan.stats.skipped += 1,
        }
    }
    Ok(scan)
}

fn load_record(base: &Path, line: usize, raw: &str) -> Outcome {
    let record: ManifestRecord = match serde_json::from_str(raw) {
        Ok(r) => r,
        Err(err) => {
            return Outcome::Failed(IngestFailure {
                line,
                path: None,
                message: CorpusError::InvalidManifestRecord {
                    line,
                    message: err.to_string(),
                }
                .to_string(),
            })
        }
    };
    let format = match record.format.as_str() {
        "akn-xml" => SourceFormat::AknXml,
        "text" => SourceFormat::Text,
        other => {
            log::info!("manifest line {line}: skipping unsupported format {other:?}");
            return Outcome::Skipped;
        }
    };
    let path = if record.path.is_absolute() {
        record.path.clone()
    } else {
        base.join(&record.path)
    };
    let fail = |message: String| {
        Outcome::Failed(IngestFailure {
            line,
            path: Some(record.path.clone()),
            message,
        })
    };
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(err) => return fail(err.to_string()),
    };
    let parsed = match format {
        SourceFormat::AknXml => parse_akn_document(&bytes),
        SourceFormat::Text => match String::from_utf8(bytes) {
            Ok(text) => parse_plain_document(&text),
            Err(err) => return fail(err.to_string()),
        },
    };
    match parsed {
        Ok(doc) => Outcome::Parsed(doc),
        Err(err) => fail(err.to_string()),
    }
}
