//! Hierarchical Navigable Small World graph over unit vectors.
//!
//! Nodes get a level `floor(-ln(U) / ln(M))` from a seeded ChaCha generator.
//! Insertion descends greedily from the entry point through the upper layers,
//! then runs an `ef_construction` beam search on every layer the new node
//! lives in and links it to neighbours picked by the diversity heuristic
//! (pruned candidates back-fill up to the degree cap). Caps are `M` on upper
//! layers and `2M` on layer 0.
//!
//! The index has two phases. While building, only [`HnswIndex::insert`] is
//! allowed; [`HnswIndex::freeze`] repairs layer-0 reachability and switches
//! to read-only, after which only [`HnswIndex::search`] is allowed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{distance, EmbeddingVector, VectorError};

pub const INDEX_FORMAT_VERSION: u64 = 1;

const MAX_LEVEL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnswConfig {
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    pub seed: u64,
}

impl Default for HnswConfig {
    fn default() -> Self {
        Self {
            m: 16,
            ef_construction: 200,
            ef_search: 50,
            seed: 42,
        }
    }
}

/// Distance paired with a node index; ordered by distance, then index.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    dist: f32,
    node: u32,
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.node.cmp(&other.node))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Node {
    id: String,
    level: usize,
    vector: Vec<f32>,
    /// `links[l]` is the neighbour list on layer `l`, for `l` in `0..=level`.
    links: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HnswIndex {
    format_version: u64,
    dimension: usize,
    config: HnswConfig,
    rng: ChaCha8Rng,
    entry_point: Option<u32>,
    max_level: usize,
    frozen: bool,
    nodes: Vec<Node>,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl HnswIndex {
    pub fn new(dimension: usize, config: HnswConfig) -> Result<Self, VectorError> {
        if dimension == 0 {
            return Err(VectorError::InvalidParameter("dimension must be positive".into()));
        }
        if config.m < 2 {
            return Err(VectorError::InvalidParameter("M must be at least 2".into()));
        }
        if config.ef_construction == 0 || config.ef_search == 0 {
            return Err(VectorError::InvalidParameter("ef values must be positive".into()));
        }
        Ok(Self {
            format_version: INDEX_FORMAT_VERSION,
            dimension,
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            entry_point: None,
            max_level: 0,
            frozen: false,
            nodes: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn config(&self) -> HnswConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn entry_point(&self) -> Option<&str> {
        self.entry_point.map(|e| self.nodes[e as usize].id.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    /// Stored vector of `id`.
    pub fn vector(&self, id: &str) -> Option<EmbeddingVector> {
        let idx = *self.lookup.get(id)?;
        EmbeddingVector::normalized(self.nodes[idx as usize].vector.clone()).ok()
    }

    pub fn level_of(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).map(|&i| self.nodes[i as usize].level)
    }

    /// Neighbours of `id` on `layer`, by id.
    pub fn neighbors(&self, id: &str, layer: usize) -> Option<Vec<&str>> {
        let idx = *self.lookup.get(id)?;
        let node = &self.nodes[idx as usize];
        node.links
            .get(layer)
            .map(|l| l.iter().map(|&n| self.nodes[n as usize].id.as_str()).collect())
    }

    fn cap(&self, layer: usize) -> usize {
        if layer == 0 {
            2 * self.config.m
        } else {
            self.config.m
        }
    }

    fn random_level(&mut self) -> usize {
        let ml = 1.0 / (self.config.m as f64).ln();
        let u: f64 = 1.0 - self.rng.gen::<f64>();
        ((-u.ln() * ml).floor() as usize).min(MAX_LEVEL)
    }

    fn dist_to(&self, query: &[f32], node: u32) -> f32 {
        distance(query, &self.nodes[node as usize].vector)
    }

    fn dist_between(&self, a: u32, b: u32) -> f32 {
        distance(&self.nodes[a as usize].vector, &self.nodes[b as usize].vector)
    }

    /// Beam search on one layer. Returns up to `ef` nodes sorted ascending.
    fn search_layer(&self, query: &[f32], entry: &[Scored], ef: usize, layer: usize) -> Vec<Scored> {
        let mut visited: HashSet<u32> = entry.iter().map(|s| s.node).collect();
        let mut candidates: BinaryHeap<Reverse<Scored>> = entry.iter().copied().map(Reverse).collect();
        let mut results: BinaryHeap<Scored> = entry.iter().copied().collect();
        while results.len() > ef {
            results.pop();
        }

        while let Some(Reverse(current)) = candidates.pop() {
            let furthest = results.peek().copied();
            if let Some(f) = furthest {
                if results.len() >= ef && current.dist > f.dist {
                    break;
                }
            }
            let Some(links) = self.nodes[current.node as usize].links.get(layer) else {
                continue;
            };
            for &next in links {
                if !visited.insert(next) {
                    continue;
                }
                let scored = Scored {
                    dist: self.dist_to(query, next),
                    node: next,
                };
                let admit = results.len() < ef || results.peek().is_some_and(|f| scored < *f);
                if admit {
                    candidates.push(Reverse(scored));
                    results.push(scored);
                    if results.len() > ef {
                        results.pop();
                    }
                }
            }
        }
        results.into_sorted_vec()
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// than to every neighbour kept so far, then back-fill with the closest
    /// rejected candidates up to `cap`. `candidates` must be sorted ascending.
    fn select_neighbors(&self, candidates: &[Scored], cap: usize) -> Vec<Scored> {
        let mut kept: Vec<Scored> = Vec::with_capacity(cap);
        let mut rejected = Vec::new();
        for &c in candidates {
            if kept.len() >= cap {
                break;
            }
            let diverse = kept.iter().all(|k| c.dist < self.dist_between(c.node, k.node));
            if diverse {
                kept.push(c);
            } else {
                rejected.push(c);
            }
        }
        for r in rejected {
            if kept.len() >= cap {
                break;
            }
            kept.push(r);
        }
        kept
    }

    pub fn insert(&mut self, id: &str, vector: &EmbeddingVector) -> Result<(), VectorError> {
        if self.frozen {
            return Err(VectorError::Frozen);
        }
        if vector.dimension() != self.dimension {
            return Err(VectorError::DimensionMismatch {
                expected: self.dimension,
                found: vector.dimension(),
            });
        }
        if self.lookup.contains_key(id) {
            return Err(VectorError::DuplicateId(id.to_string()));
        }

        let level = self.random_level();
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node {
            id: id.to_string(),
            level,
            vector: vector.values().to_vec(),
            links: vec![Vec::new(); level + 1],
        });
        self.lookup.insert(id.to_string(), idx);

        let Some(entry) = self.entry_point else {
            self.entry_point = Some(idx);
            self.max_level = level;
            return Ok(());
        };

        let query = vector.values();
        let mut eps = vec![Scored {
            dist: self.dist_to(query, entry),
            node: entry,
        }];
        for layer in (level + 1..=self.max_level).rev() {
            eps = self.search_layer(query, &eps, 1, layer);
        }
        for layer in (0..=level.min(self.max_level)).rev() {
            let found = self.search_layer(query, &eps, self.config.ef_construction, layer);
            let chosen = self.select_neighbors(&found, self.config.m);
            self.nodes[idx as usize].links[layer] = chosen.iter().map(|s| s.node).collect();
            for s in &chosen {
                self.link(s.node, idx, layer);
            }
            eps = found;
        }
        if level > self.max_level {
            self.max_level = level;
            self.entry_point = Some(idx);
        }
        Ok(())
    }

    /// Adds `to` to `from`'s list on `layer`, pruning back to the cap.
    fn link(&mut self, from: u32, to: u32, layer: usize) {
        let cap = self.cap(layer);
        let links = &self.nodes[from as usize].links[layer];
        if links.contains(&to) {
            return;
        }
        if links.len() < cap {
            self.nodes[from as usize].links[layer].push(to);
            return;
        }
        let mut candidates: Vec<Scored> = links
            .iter()
            .chain(std::iter::once(&to))
            .map(|&n| Scored {
                dist: self.dist_between(from, n),
                node: n,
            })
            .collect();
        candidates.sort();
        let kept = self.select_neighbors(&candidates, cap);
        self.nodes[from as usize].links[layer] = kept.into_iter().map(|s| s.node).collect();
    }

    /// Layer-0 nodes reachable from the entry point.
    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let Some(entry) = self.entry_point else {
            return seen;
        };
        let mut queue = VecDeque::from([entry]);
        seen[entry as usize] = true;
        self.flood(&mut seen, &mut queue);
        seen
    }

    fn flood(&self, seen: &mut [bool], queue: &mut VecDeque<u32>) {
        while let Some(n) = queue.pop_front() {
            for &next in &self.nodes[n as usize].links[0] {
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    queue.push_back(next);
                }
            }
        }
    }

    /// Links every layer-0 node that pruning left unreachable from the
    /// nearest reachable node that still has room, then marks the index
    /// read-only. Returns the number of repair links added.
    pub fn freeze(&mut self) -> usize {
        if self.frozen {
            return 0;
        }
        let mut seen = self.reachable();
        let cap = self.cap(0);
        let mut repaired = 0;
        for x in 0..self.nodes.len() as u32 {
            if seen[x as usize] {
                continue;
            }
            let by_distance = |with_room: bool| {
                (0..self.nodes.len() as u32)
                    .filter(|&y| seen[y as usize] && (!with_room || self.nodes[y as usize].links[0].len() < cap))
                    .map(|y| Scored {
                        dist: self.dist_between(x, y),
                        node: y,
                    })
                    .min()
            };
            if let Some(host) = by_distance(true) {
                self.nodes[host.node as usize].links[0].push(x);
            } else if let Some(host) = by_distance(false) {
                // Every reachable list is full: replace the host's furthest
                // neighbour that some other node also links to.
                let in_degree = |n: u32| self.nodes.iter().filter(|node| node.links[0].contains(&n)).count();
                let host_links = self.nodes[host.node as usize].links[0].clone();
                let victim = host_links
                    .iter()
                    .copied()
                    .filter(|&n| in_degree(n) >= 2)
                    .max_by(|&a, &b| {
                        self.dist_between(host.node, a)
                            .total_cmp(&self.dist_between(host.node, b))
                            .then(a.cmp(&b))
                    });
                let links = &mut self.nodes[host.node as usize].links[0];
                match victim.and_then(|v| links.iter().position(|&n| n == v)) {
                    Some(pos) => links[pos] = x,
                    None => links.push(x),
                }
            }
            repaired += 1;
            seen[x as usize] = true;
            let mut queue = VecDeque::from([x]);
            self.flood(&mut seen, &mut queue);
        }
        if repaired > 0 {
            log::debug!("hnsw freeze: {repaired} repair links added");
        }
        self.frozen = true;
        repaired
    }

    /// Approximate k nearest neighbours, sorted by distance then id.
    pub fn search(
        &self,
        query: &EmbeddingVector,
        k: usize,
        ef_search: usize,
    ) -> Result<Vec<(String, f32)>, VectorError> {
        if !self.frozen {
            return Err(VectorError::NotFrozen);
        }
        if k == 0 {
            return Err(VectorError::InvalidParameter("k must be at least 1".into()));
        }
        if query.dimension() != self.dimension {
            return Err(VectorError::DimensionMismatch {
                expected: self.dimension,
                found: query.dimension(),
            });
        }
        let entry = self.entry_point.ok_or(VectorError::EmptyIndex)?;
        let q = query.values();
        let mut eps = vec![Scored {
            dist: self.dist_to(q, entry),
            node: entry,
        }];
        for layer in (1..=self.max_level).rev() {
            eps = self.search_layer(q, &eps, 1, layer);
        }
        let found = self.search_layer(q, &eps, ef_search.max(k), 0);
        let mut results: Vec<(String, f32)> = found
            .into_iter()
            .map(|s| (self.nodes[s.node as usize].id.clone(), s.dist))
            .collect();
        results.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        results.truncate(k);
        Ok(results)
    }

    /// Checks the structural invariants; reachability is checked only once frozen.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.nodes.len();
        match self.entry_point {
            None if n == 0 => return Ok(()),
            None => return Err("non-empty index without entry point".into()),
            Some(e) if e as usize >= n => return Err("entry point out of range".into()),
            Some(e) => {
                if self.nodes[e as usize].level != self.max_level {
                    return Err("entry point is not on the top layer".into());
                }
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.level > self.max_level {
                return Err(format!("node {} above max level", node.id));
            }
            if node.links.len() != node.level + 1 {
                return Err(format!(
                    "node {} has {} link layers for level {}",
                    node.id,
                    node.links.len(),
                    node.level
                ));
            }
            if node.vector.len() != self.dimension {
                return Err(format!("node {} has wrong dimension", node.id));
            }
            for (layer, links) in node.links.iter().enumerate() {
                if links.len() > self.cap(layer) {
                    return Err(format!("node {} exceeds degree cap on layer {layer}", node.id));
                }
                let unique: HashSet<_> = links.iter().collect();
                if unique.len() != links.len() {
                    return Err(format!("node {} has duplicate links on layer {layer}", node.id));
                }
                for &l in links {
                    if l as usize >= n || l as usize == i {
                        return Err(format!("node {} has invalid link {l}", node.id));
                    }
                    if self.nodes[l as usize].level < layer {
                        return Err(format!(
                            "node {} links to {} on layer {layer} above its level",
                            node.id, l
                        ));
                    }
                }
            }
            if self.lookup.get(&node.id) != Some(&(i as u32)) {
                return Err(format!("lookup out of sync for {}", node.id));
            }
        }
        if self.frozen {
            if let Some(missing) = self.reachable().iter().position(|r| !r) {
                return Err(format!("node {} unreachable on layer 0", self.nodes[missing].id));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("index serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VectorError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| VectorError::CorruptIndex(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| VectorError::CorruptIndex("missing format_version".into()))?;
        if found != INDEX_FORMAT_VERSION {
            return Err(VectorError::VersionMismatch {
                found,
                expected: INDEX_FORMAT_VERSION,
            });
        }
        let mut index: HnswIndex =
            serde_json::from_value(value).map_err(|e| VectorError::CorruptIndex(e.to_string()))?;
        for (i, node) in index.nodes.iter().enumerate() {
            if index.lookup.insert(node.id.clone(), i as u32).is_some() {
                return Err(VectorError::CorruptIndex(format!("duplicate id {}", node.id)));
            }
        }
        index.check_invariants().map_err(VectorError::CorruptIndex)?;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<(), VectorError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| VectorError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, VectorError> {
        let bytes = std::fs::read(path).map_err(|source| VectorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
