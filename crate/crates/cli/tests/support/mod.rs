//! Fixture corpus ingested once per test binary, plus request helpers.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use legis::api::{router, ServeSettings};
use legis::commands::load_engine;
use legis_core::report::Locale;
use legis_core::Engine;
use tempfile::TempDir;
use tower::ServiceExt;

pub const LANDSCAPE_INPUT: &str =
    "Disposizioni sull'uso dell'intelligenza artificiale nella sanità e nella sicurezza informatica";

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    workspace_root().join("fixtures").join(rel)
}

pub fn legis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_legis"))
        .args(args)
        .env_remove("LEGIS_LLM_MODE")
        .env_remove("LEGIS_EMBED_DIM")
        .output()
        .expect("legis binary runs")
}

pub struct Ingested {
    _dir: TempDir,
    pub snapshot: PathBuf,
    pub index: PathBuf,
}

impl Ingested {
    pub fn snapshot_arg(&self) -> &str {
        self.snapshot.to_str().unwrap()
    }

    pub fn index_arg(&self) -> &str {
        self.index.to_str().unwrap()
    }
}

pub fn ingest_into(dir: TempDir) -> Ingested {
    let snapshot = dir.path().join("graph.json");
    let index = dir.path().join("index.json");
    let manifest = fixture("corpus/manifest.jsonl");
    let out = legis(&[
        "ingest",
        "--manifest",
        manifest.to_str().unwrap(),
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "ingest failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Ingested {
        _dir: dir,
        snapshot,
        index,
    }
}

pub fn ingested() -> &'static Ingested {
    static CELL: OnceLock<Ingested> = OnceLock::new();
    CELL.get_or_init(|| ingest_into(TempDir::new().unwrap()))
}

pub fn engine() -> Engine {
    let ing = ingested();
    load_engine(&ing.snapshot, &ing.index, Locale::It).expect("engine loads")
}

pub fn app() -> Router {
    app_with(Arc::new(engine()), ServeSettings::default())
}

pub fn app_with(engine: Arc<Engine>, settings: ServeSettings) -> Router {
    router(engine, settings)
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub api_version: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).expect("JSON body")
    }
}

pub async fn send(app: &Router, request: Request<Body>) -> Reply {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let (content_type, api_version) = {
        let header = |name: &str| response.headers().get(name).map(|v| v.to_str().unwrap().to_string());
        (header("content-type"), header("x-api-version"))
    };
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        api_version,
        body,
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> Reply {
    let request = Request::post(uri)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    send(app, request).await
}
