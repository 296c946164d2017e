use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use legis_core::corpus::scan_corpus;
use legis_core::graph::GraphStore;
use legis_core::llm::{Gateway, LlmConfig};
use legis_core::metrics::PosLexicons;
use legis_core::monitor::{export_dataset, timeseries, Dataset, ExportFormat, Granularity, Metric};
use legis_core::pipeline::{build_index, Engine, DEFAULT_EMBEDDING_CHARS, DEFAULT_K};
use legis_core::report::Locale;
use legis_core::vector::{HnswConfig, HnswIndex, DEFAULT_MOCK_DIMENSION};
use serde::Serialize;
use serde_json::json;

use crate::api::{self, ServeSettings};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "legis", version, about = "Legislative knowledge graph engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus manifest into a graph snapshot and, optionally, a vector index.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Seed of the index level generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Embedding dimension; must match the embedding model in live mode.
        #[arg(long, env = "LEGIS_EMBED_DIM", default_value_t = DEFAULT_MOCK_DIMENSION)]
        embed_dim: usize,
        /// Body characters embedded per law, after the title.
        #[arg(long, default_value_t = DEFAULT_EMBEDDING_CHARS)]
        embedding_chars: usize,
    },
    /// Print the readability profile of one law.
    Metrics {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        law: String,
    },
    /// Retrieve the normative landscape of a text.
    Landscape {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        /// Reference date for the in-force filter; defaults to today.
        #[arg(long, value_parser = parse_date)]
        as_of: Option<NaiveDate>,
    },
    /// Export a complexity time series.
    Monitor {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_parser = parse_value::<Metric>)]
        metric: Metric,
        #[arg(long, value_parser = parse_value::<Granularity>, default_value = "year")]
        granularity: Granularity,
        #[arg(long, value_parser = parse_date)]
        from: NaiveDate,
        #[arg(long, value_parser = parse_date)]
        to: NaiveDate,
        #[arg(long, value_parser = parse_value::<ExportFormat>, default_value = "json")]
        format: ExportFormat,
    },
    /// Serve the HTTP API over a snapshot and index.
    Serve {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Default number of relevant laws per request.
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, value_parser = parse_value::<Locale>, default_value = "it")]
        locale: Locale,
        /// Allowed browser origin; any origin when unset.
        #[arg(long, env = "LEGIS_CORS_ORIGIN")]
        cors_origin: Option<String>,
        /// Concurrent requests allowed to call the chat backend.
        #[arg(long, default_value_t = 4)]
        max_in_flight: usize,
    },
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    s.parse().map_err(|_| format!("expected a YYYY-MM-DD date, got {s:?}"))
}

fn parse_value<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    out.write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn load_graph(snapshot: &Path) -> Result<GraphStore, CliError> {
    Ok(GraphStore::load_snapshot(snapshot)?)
}

/// Loads the snapshot and index and wires the backends from the environment.
pub fn load_engine(snapshot: &Path, index: &Path, locale: Locale) -> Result<Engine, CliError> {
    let graph = load_graph(snapshot)?.freeze();
    let index = HnswIndex::load(index)?;
    let config = LlmConfig::from_env()?;
    let embedder = config.embedder(index.dimension())?;
    let gateway = Gateway::from_config(&config)?;
    let engine = Engine::new(
        graph,
        Arc::new(index),
        embedder,
        gateway,
        Arc::new(PosLexicons::italian()),
    )?;
    Ok(engine.with_locale(locale))
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Ingest {
            manifest,
            snapshot,
            index,
            seed,
            embed_dim,
            embedding_chars,
        } => ingest(
            &manifest,
            &snapshot,
            index.as_deref(),
            seed,
            embed_dim,
            embedding_chars,
            out,
        ),
        Command::Metrics { snapshot, law } => {
            let graph = load_graph(&snapshot)?;
            let node = graph
                .node(&law)
                .filter(|n| n.is_law() && !n.is_stub())
                .ok_or_else(|| CliError::Validation(format!("unknown law {law}")))?;
            let text = node.properties.text.as_deref().unwrap_or_default();
            let profile = legis_core::metrics::profile(text, &PosLexicons::italian())
                .map_err(|e| CliError::Validation(format!("{law}: {e}")))?;
            let value = json!({
                "law_id": node.node_id,
                "title": node.properties.title,
                "publication_date": node.properties.publication_date,
                "ministry_domain": node.properties.ministry_domain,
                "profile": profile,
            });
            write_json(out, &value)
        }
        Command::Landscape {
            snapshot,
            index,
            input,
            k,
            as_of,
        } => {
            let engine = load_engine(&snapshot, &index, Locale::default())?;
            let as_of = as_of.unwrap_or_else(|| chrono::Utc::now().date_naive());
            let result = engine.landscape(&input, as_of, k)?;
            write_json(out, &result)
        }
        Command::Monitor {
            snapshot,
            metric,
            granularity,
            from,
            to,
            format,
        } => {
            let graph = load_graph(&snapshot)?;
            let series = timeseries(&graph, metric, granularity, from, to)?;
            out.write_all(&export_dataset(Dataset::Series(&series), format))
                .map_err(|e| CliError::Io(e.to_string()))
        }
        Command::Serve {
            snapshot,
            index,
            port,
            host,
            k,
            locale,
            cors_origin,
            max_in_flight,
        } => {
            if k == 0 || max_in_flight == 0 {
                return Err(CliError::Validation(
                    "--k and --max-in-flight must be at least 1".into(),
                ));
            }
            let engine = load_engine(&snapshot, &index, locale)?;
            let settings = ServeSettings {
                default_k: k,
                locale,
                cors_origin,
                max_in_flight,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            runtime.block_on(api::serve(engine, settings, &host, port))
        }
    }
}

fn ingest(
    manifest: &Path,
    snapshot: &Path,
    index: Option<&Path>,
    seed: u64,
    embed_dim: usize,
    embedding_chars: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let scan = scan_corpus(manifest)?;
    for failure in &scan.failures {
        log::warn!("manifest line {}: {}", failure.line, failure.message);
    }
    let mut graph = GraphStore::new();
    for doc in &scan.documents {
        graph.upsert_law(doc);
    }
    graph.save_snapshot(snapshot)?;
    let (nodes, edges) = (graph.node_count(), graph.edge_count());
    let mut indexed = None;
    if let Some(path) = index {
        let config = LlmConfig::from_env()?;
        let embedder = config.embedder(embed_dim)?;
        let hnsw = HnswConfig {
            seed,
            ..HnswConfig::default()
        };
        let graph = graph.freeze();
        let built = build_index(&graph, embedder.as_ref(), hnsw, embedding_chars)?;
        built.save(path)?;
        indexed = Some(built.len());
    }
    let summary = json!({
        "stats": scan.stats,
        "failures": scan.failures,
        "nodes": nodes,
        "edges": edges,
        "indexed": indexed,
    });
    write_json(out, &summary)
}
