//! Whole-graph JSON snapshots with sorted node and edge arrays.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeKey, EdgeRecord, GraphError, GraphStore, NodeRecord};

pub const SNAPSHOT_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub format_version: u64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphStore {
    pub fn to_snapshot(&self) -> GraphSnapshot {
        GraphSnapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges().collect(),
        }
    }

    pub fn from_snapshot(snapshot: GraphSnapshot) -> Result<Self, GraphError> {
        if snapshot.format_version != SNAPSHOT_FORMAT_VERSION {
            return Err(GraphError::VersionMismatch {
                found: snapshot.format_version,
                expected: SNAPSHOT_FORMAT_VERSION,
            });
        }
        let mut store = GraphStore::new();
        for node in snapshot.nodes {
            if store.nodes.insert(node.node_id.clone(), node).is_some() {
                return Err(GraphError::CorruptSnapshot("duplicate node id".into()));
            }
        }
        for edge in snapshot.edges {
            let key = EdgeKey {
                src: edge.src,
                dst: edge.dst,
                kind: edge.kind,
                ref_kind: edge.properties.ref_kind,
            };
            if store.edges.contains_key(&key) {
                return Err(GraphError::CorruptSnapshot(format!(
                    "duplicate edge {} -> {}",
                    key.src, key.dst
                )));
            }
            store.insert_edge(key, edge.properties);
        }
        store.validate()?;
        Ok(store)
    }

    /// Pretty-printed snapshot bytes; identical graphs give identical bytes.
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(&self.to_snapshot()).expect("snapshot serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self, GraphError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| GraphError::CorruptSnapshot(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| GraphError::CorruptSnapshot("missing format_version".into()))?;
        if found != SNAPSHOT_FORMAT_VERSION {
            return Err(GraphError::VersionMismatch {
                found,
                expected: SNAPSHOT_FORMAT_VERSION,
            });
        }
        let snapshot: GraphSnapshot =
            serde_json::from_value(value).map_err(|e| GraphError::CorruptSnapshot(e.to_string()))?;
        Self::from_snapshot(snapshot)
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.snapshot_bytes()).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_snapshot(path: &Path) -> Result<Self, GraphError> {
        let bytes = std::fs::read(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_snapshot_bytes(&bytes)
    }
}
