mod support;

use support::*;
use tempfile::TempDir;

#[test]
fn ingest_creates_snapshot_and_prints_stats() {
    let ing = ingest_into(TempDir::new().unwrap());
    assert!(ing.snapshot.is_file());
    assert!(ing.index.is_file());
    let manifest = fixture("corpus/manifest.jsonl");
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("g.json");
    let out = legis(&[
        "ingest",
        "--manifest",
        manifest.to_str().unwrap(),
        "--snapshot",
        snap.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["stats"]["parsed"], 10);
    assert_eq!(stats["stats"]["failed"], 0);
    assert_eq!(stats["indexed"], serde_json::Value::Null);
    assert_eq!(std::fs::read(&snap).unwrap(), std::fs::read(&ing.snapshot).unwrap());
}

#[test]
fn metrics_for_a_known_law() {
    let ing = ingested();
    let out = legis(&[
        "metrics",
        "--snapshot",
        ing.snapshot_arg(),
        "--law",
        "/akn/it/act/2005-03-07/82",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let profile: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = profile["profile"]["gulpease"].as_f64().unwrap();
    assert!((0.0..=100.0).contains(&g));
}

#[test]
fn metrics_on_unknown_id_exits_1() {
    let ing = ingested();
    let out = legis(&[
        "metrics",
        "--snapshot",
        ing.snapshot_arg(),
        "--law",
        "/akn/it/act/1900-01-01/0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_snapshot_exits_2() {
    let out = legis(&["metrics", "--snapshot", "/nonexistent/graph.json", "--law", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(legis(&["frobnicate"]).status.code(), Some(1));
    let ing = ingested();
    let out = legis(&[
        "monitor",
        "--snapshot",
        ing.snapshot_arg(),
        "--metric",
        "nope",
        "--from",
        "2000-01-01",
        "--to",
        "2001-01-01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = legis(&[
        "monitor",
        "--snapshot",
        ing.snapshot_arg(),
        "--metric",
        "laws_enacted",
        "--from",
        "2001-01-01",
        "--to",
        "2000-01-01",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = legis(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("landscape"));
}

fn landscape(ing: &Ingested) -> Vec<u8> {
    let out = legis(&[
        "landscape",
        "--snapshot",
        ing.snapshot_arg(),
        "--index",
        ing.index_arg(),
        "--input",
        LANDSCAPE_INPUT,
        "--k",
        "5",
        "--as-of",
        "2024-06-30",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn landscape_stdout_is_byte_stable() {
    let first = landscape(ingested());
    let fresh = ingest_into(TempDir::new().unwrap());
    assert_eq!(first, landscape(&fresh));
    assert_eq!(first, std::fs::read(fixture("golden/landscape.json")).unwrap());
}

#[test]
fn landscape_rejects_empty_input() {
    let ing = ingested();
    let out = legis(&[
        "landscape",
        "--snapshot",
        ing.snapshot_arg(),
        "--index",
        ing.index_arg(),
        "--input",
        "  ",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn monitor_csv_matches_library_export() {
    use legis_core::graph::GraphStore;
    use legis_core::monitor::{export_dataset, timeseries, Dataset, ExportFormat, Granularity, Metric};

    let ing = ingested();
    let out = legis(&[
        "monitor",
        "--snapshot",
        ing.snapshot_arg(),
        "--metric",
        "in_force_count",
        "--granularity",
        "year",
        "--from",
        "1975-01-01",
        "--to",
        "2023-12-31",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let graph = GraphStore::load_snapshot(&ing.snapshot).unwrap();
    let from = "1975-01-01".parse().unwrap();
    let to = "2023-12-31".parse().unwrap();
    let series = timeseries(&graph, Metric::InForceCount, Granularity::Year, from, to).unwrap();
    assert_eq!(out.stdout, export_dataset(Dataset::Series(&series), ExportFormat::Csv));
    let text = String::from_utf8(out.stdout).unwrap();
    // 422/1997 is abrogated from 2022-01-01, so the count drops at the 2022 year end.
    assert!(text.contains("2021-01-01,10\n"));
    assert!(text.contains("2022-01-01,9\n"));
}
