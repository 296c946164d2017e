//! Random graph generation and brute-force oracles shared by the oracle
//! tests and the acceptance harness. The oracles work on the generator's
//! plain model, never on the graph store.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Months, NaiveDate};
use legis_core::corpus::{Abrogation, ArticleUnit, LawDocument, RawReference, RefKind};
use legis_core::graph::GraphStore;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn date(s: &str) -> NaiveDate {
    s.parse().expect("valid date literal")
}

#[derive(Debug, Clone)]
pub struct ModelLaw {
    pub id: String,
    pub published: NaiveDate,
    pub articles: Vec<String>,
}

/// One citation as declared: source unit, target, kind. Distinct by construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModelRef {
    pub source_law: usize,
    pub source_unit: String,
    pub target: String,
    pub kind: RefKind,
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub laws: Vec<ModelLaw>,
    pub refs: Vec<ModelRef>,
    /// (abrogating law, abrogated law, effective date); distinct pairs.
    pub abrogations: Vec<(usize, usize, NaiveDate)>,
}

#[derive(Debug, Clone, Copy)]
pub struct GraphShape {
    pub laws: usize,
    pub max_articles: usize,
    pub refs_per_law: usize,
    pub abrogation_rate: f64,
    pub external_targets: usize,
}

impl GraphShape {
    pub fn small(laws: usize) -> Self {
        Self {
            laws,
            max_articles: 3,
            refs_per_law: 4,
            abrogation_rate: 0.2,
            external_targets: 8,
        }
    }
}

pub fn random_date<R: Rng>(rng: &mut R, from_year: i32, to_year: i32) -> NaiveDate {
    let year = rng.gen_range(from_year..=to_year);
    let ordinal = rng.gen_range(1..=365);
    NaiveDate::from_yo_opt(year, ordinal).expect("ordinal within year")
}

pub fn random_model<R: Rng>(rng: &mut R, shape: GraphShape) -> Model {
    let mut model = Model::default();
    let mut seen_ids = BTreeSet::new();
    for i in 0..shape.laws {
        let published = random_date(rng, 1990, 2020);
        let id = format!("/akn/it/act/{published}/{}", i + 1);
        assert!(seen_ids.insert(id.clone()));
        let n_articles = rng.gen_range(0..=shape.max_articles);
        let articles = (1..=n_articles).map(|a| format!("{id}#art_{a}")).collect();
        model.laws.push(ModelLaw {
            id,
            published,
            articles,
        });
    }
    let externals: Vec<String> = (0..shape.external_targets)
        .map(|j| format!("/akn/it/act/1947-12-27/ext{j}"))
        .collect();

    let mut refs = BTreeSet::new();
    for (i, law) in model.laws.iter().enumerate() {
        let n = rng.gen_range(0..=shape.refs_per_law);
        for _ in 0..n {
            let kind = if rng.gen_bool(0.5) {
                RefKind::Preamble
            } else {
                RefKind::Body
            };
            let source_unit = match (kind, law.articles.choose(rng)) {
                (RefKind::Body, Some(article)) => article.clone(),
                _ => law.id.clone(),
            };
            let target = match rng.gen_range(0..3) {
                0 if !externals.is_empty() => externals.choose(rng).unwrap().clone(),
                1 => {
                    let other = model.laws.choose(rng).unwrap();
                    other.articles.choose(rng).cloned().unwrap_or_else(|| other.id.clone())
                }
                _ => model.laws.choose(rng).unwrap().id.clone(),
            };
            refs.insert(ModelRef {
                source_law: i,
                source_unit,
                target,
                kind,
            });
        }
    }
    model.refs = refs.into_iter().collect();

    let mut pairs = BTreeSet::new();
    if model.laws.len() > 1 {
        let n = (model.laws.len() as f64 * shape.abrogation_rate).round() as usize;
        for _ in 0..n {
            let src = rng.gen_range(0..model.laws.len());
            let dst = rng.gen_range(0..model.laws.len());
            if src != dst && pairs.insert((src, dst)) {
                model.abrogations.push((src, dst, random_date(rng, 1990, 2025)));
            }
        }
    }
    model
}

pub fn documents(model: &Model) -> Vec<LawDocument> {
    model
        .laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let mut preamble_refs = Vec::new();
            let mut body_refs = Vec::new();
            for r in model.refs.iter().filter(|r| r.source_law == i) {
                let raw = RawReference {
                    source_unit: r.source_unit.clone(),
                    target_uri: r.target.clone(),
                    kind: r.kind,
                    specifies_paragraph: false,
                    raw_href: r.target.clone(),
                };
                match r.kind {
                    RefKind::Preamble => preamble_refs.push(raw),
                    RefKind::Body => body_refs.push(raw),
                }
            }
            LawDocument {
                law_id: law.id.clone(),
                title: format!("Legge numero {}", i + 1),
                publication_date: law.published,
                ministry_domain: Some(["salute", "ambiente", "economia"][i % 3].to_string()),
                articles: law
                    .articles
                    .iter()
                    .enumerate()
                    .map(|(a, id)| ArticleUnit {
                        article_id: id.clone(),
                        number: (a + 1).to_string(),
                        heading: None,
                        text: format!("Articolo {} della legge {}.", a + 1, i + 1),
                    })
                    .collect(),
                preamble_refs,
                body_refs,
                abrogations: Vec::new(),
                full_text: format!("Legge numero {}. Il testo disciplina la materia.", i + 1),
            }
        })
        .collect()
}

/// Ingests the model; abrogations alternate between the document field and
/// the explicit edge call so both paths are exercised.
pub fn build_graph(model: &Model) -> GraphStore {
    let mut docs = documents(model);
    let mut late = Vec::new();
    for (n, &(src, dst, when)) in model.abrogations.iter().enumerate() {
        if n % 2 == 0 {
            docs[src].abrogations.push(Abrogation {
                target_uri: model.laws[dst].id.clone(),
                effective_date: when,
            });
        } else {
            late.push((src, dst, when));
        }
    }
    let mut graph = GraphStore::new();
    for doc in &docs {
        graph.upsert_law(doc);
    }
    for (src, dst, when) in late {
        graph
            .add_abrogation(&model.laws[src].id, &model.laws[dst].id, when)
            .expect("both laws ingested");
    }
    graph
}

/// Laws published by `as_of` with no abrogation effective by `as_of`,
/// found by scanning every law against every abrogation.
pub fn in_force_oracle(model: &Model, as_of: NaiveDate) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (i, law) in model.laws.iter().enumerate() {
        if law.published > as_of {
            continue;
        }
        let mut abrogated = false;
        for &(_, dst, when) in &model.abrogations {
            if dst == i && when <= as_of {
                abrogated = true;
            }
        }
        if !abrogated {
            out.insert(law.id.clone());
        }
    }
    out
}

/// Target -> number of distinct laws in `relevant` with a preamble citation of it.
pub fn foundations_oracle(model: &Model, relevant: &[String]) -> Vec<(String, usize, f64)> {
    let distinct: BTreeSet<&String> = relevant.iter().collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut targets = BTreeSet::new();
    for r in &model.refs {
        if r.kind == RefKind::Preamble {
            targets.insert(r.target.clone());
        }
    }
    for target in targets {
        let mut n = 0;
        for law_id in &distinct {
            let i = model
                .laws
                .iter()
                .position(|l| &&l.id == law_id)
                .expect("relevant law in model");
            if model
                .refs
                .iter()
                .any(|r| r.source_law == i && r.kind == RefKind::Preamble && r.target == target)
            {
                n += 1;
            }
        }
        if n > 0 {
            counts.insert(target, n);
        }
    }
    let total = distinct.len() as f64;
    let mut ranked: Vec<(String, usize, f64)> = counts.into_iter().map(|(t, n)| (t, n, n as f64 / total)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Period starts and inclusive ends covering `[from, to]`, one day at a time.
pub fn oracle_periods(from: NaiveDate, to: NaiveDate, monthly: bool) -> Vec<(NaiveDate, NaiveDate)> {
    let mut out: Vec<(NaiveDate, NaiveDate)> = Vec::new();
    let mut day = from;
    while day <= to {
        let start = if monthly {
            NaiveDate::from_ymd_opt(day.year(), day.month(), 1).unwrap()
        } else {
            NaiveDate::from_ymd_opt(day.year(), 1, 1).unwrap()
        };
        if out.last().map(|p| p.0) != Some(start) {
            let step = if monthly { Months::new(1) } else { Months::new(12) };
            out.push((start, start.checked_add_months(step).unwrap().pred_opt().unwrap()));
        }
        day = day.succ_opt().unwrap();
    }
    out
}

pub fn timeseries_oracle(model: &Model, metric: &str, periods: &[(NaiveDate, NaiveDate)]) -> Vec<f64> {
    let out_degree = |i: usize| model.refs.iter().filter(|r| r.source_law == i).count();
    periods
        .iter()
        .map(|&(start, end)| match metric {
            "laws_enacted" => model
                .laws
                .iter()
                .filter(|l| l.published >= start && l.published <= end)
                .count() as f64,
            "in_force_count" => in_force_oracle(model, end).len() as f64,
            "avg_outgoing_citations" => {
                let upto: Vec<usize> = (0..model.laws.len())
                    .filter(|&i| model.laws[i].published <= end)
                    .collect();
                if upto.is_empty() {
                    0.0
                } else {
                    upto.iter().map(|&i| out_degree(i) as f64).sum::<f64>() / upto.len() as f64
                }
            }
            "new_citations" => model
                .refs
                .iter()
                .filter(|r| {
                    let p = model.laws[r.source_law].published;
                    p >= start && p <= end
                })
                .count() as f64,
            other => panic!("unknown metric {other}"),
        })
        .collect()
}

/// Law id a citation target belongs to.
pub fn target_law(target: &str) -> &str {
    target.split('#').next().unwrap()
}

/// CITES in-degree histogram over every law node, stubs included.
pub fn in_degree_oracle(model: &Model) -> Vec<(usize, usize)> {
    let mut degree: BTreeMap<String, usize> = model.laws.iter().map(|l| (l.id.clone(), 0)).collect();
    for r in &model.refs {
        *degree.entry(target_law(&r.target).to_string()).or_default() += 1;
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in degree.values() {
        *hist.entry(*d).or_default() += 1;
    }
    hist.into_iter().collect()
}

/// `n` seeded unit vectors with Gaussian components.
pub fn random_unit_vectors<R: Rng>(
    rng: &mut R,
    n: usize,
    dimension: usize,
) -> Vec<legis_core::vector::EmbeddingVector> {
    use rand_distr::StandardNormal;
    (0..n)
        .map(|_| {
            let v: Vec<f32> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
            legis_core::vector::EmbeddingVector::normalized(v).expect("non-zero vector")
        })
        .collect()
}

/// Exact k nearest ids by `1 - a·b`, ties broken by id.
pub fn brute_force_knn(
    ids: &[String],
    vectors: &[legis_core::vector::EmbeddingVector],
    query: &legis_core::vector::EmbeddingVector,
    k: usize,
) -> Vec<String> {
    let q = query.values();
    let mut scored: Vec<(f32, &String)> = ids
        .iter()
        .zip(vectors)
        .map(|(id, v)| {
            let dot: f32 = q.iter().zip(v.values()).map(|(a, b)| a * b).sum();
            ((1.0 - dot).clamp(0.0, 2.0), id)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, id)| id.clone()).collect()
}

pub struct RecallRun {
    pub recall_default: f64,
    pub recall_exhaustive: f64,
}

/// Builds a seeded index of `n` vectors and measures recall@k over `queries`
/// fresh query vectors, at the configured `ef_search` and at `ef_search = n`.
pub fn hnsw_recall(seed: u64, n: usize, dimension: usize, queries: usize, k: usize) -> RecallRun {
    use legis_core::vector::{HnswConfig, HnswIndex};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vectors = random_unit_vectors(&mut rng, n, dimension);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:05}")).collect();
    let config = HnswConfig {
        seed,
        ..HnswConfig::default()
    };
    let mut index = HnswIndex::new(dimension, config).unwrap();
    for (id, v) in ids.iter().zip(&vectors) {
        index.insert(id, v).unwrap();
    }
    index.freeze();
    let qs = random_unit_vectors(&mut rng, queries, dimension);
    let mut hits_default = 0usize;
    let mut hits_exhaustive = 0usize;
    for q in &qs {
        let truth: BTreeSet<String> = brute_force_knn(&ids, &vectors, q, k).into_iter().collect();
        let found = |ef: usize| -> usize {
            index
                .search(q, k, ef)
                .unwrap()
                .into_iter()
                .filter(|(id, _)| truth.contains(id))
                .count()
        };
        hits_default += found(config.ef_search);
        hits_exhaustive += found(n);
    }
    let total = (queries * k) as f64;
    RecallRun {
        recall_default: hits_default as f64 / total,
        recall_exhaustive: hits_exhaustive as f64 / total,
    }
}
