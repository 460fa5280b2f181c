//! Entity alignment: merging surface variants of one entity by a weighted
//! blend of character Jaccard similarity and embedding cosine similarity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EntityType, GraphBuilder, KnowledgeGraph};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AlignError {
    #[error("vector dimension {got} does not match {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector for `{0}`")]
    ZeroVector(String),
    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextMode {
    /// Jaccard over distinct characters.
    #[default]
    CharSet,
    /// Jaccard over character multisets (`Σ min / Σ max` of counts).
    CharMultiset,
}

/// Character Jaccard similarity; two empty strings score 1.
pub fn jaccard_text(a: &str, b: &str) -> f64 {
    let sa: BTreeSet<char> = a.chars().collect();
    let sb: BTreeSet<char> = b.chars().collect();
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    inter as f64 / union as f64
}

pub fn jaccard_text_multiset(a: &str, b: &str) -> f64 {
    let mut counts: BTreeMap<char, (usize, usize)> = BTreeMap::new();
    for c in a.chars() {
        counts.entry(c).or_default().0 += 1;
    }
    for c in b.chars() {
        counts.entry(c).or_default().1 += 1;
    }
    if counts.is_empty() {
        return 1.0;
    }
    let (min, max) = counts
        .values()
        .fold((0, 0), |(lo, hi), &(x, y)| (lo + x.min(y), hi + x.max(y)));
    min as f64 / max as f64
}

fn text_similarity(a: &str, b: &str, mode: TextMode) -> f64 {
    match mode {
        TextMode::CharSet => jaccard_text(a, b),
        TextMode::CharMultiset => jaccard_text_multiset(a, b),
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

pub fn cosine_sim(va: &[f64], vb: &[f64]) -> Result<f64, AlignError> {
    if va.len() != vb.len() {
        return Err(AlignError::DimensionMismatch {
            expected: va.len(),
            got: vb.len(),
        });
    }
    let (na, nb) = (norm(va), norm(vb));
    if na == 0.0 || nb == 0.0 {
        return Err(AlignError::ZeroVector(String::new()));
    }
    let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Surface string → fixed-dimension vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, surface: impl Into<String>, vector: Vec<f64>) -> Result<(), AlignError> {
        let surface = surface.into();
        if vector.len() != self.dim {
            return Err(AlignError::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().all(|&x| x == 0.0) {
            return Err(AlignError::ZeroVector(surface));
        }
        self.vectors.insert(surface, vector);
        Ok(())
    }

    pub fn get(&self, surface: &str) -> Result<&[f64], AlignError> {
        self.vectors
            .get(surface)
            .map(Vec::as_slice)
            .ok_or_else(|| AlignError::MissingEmbedding(surface.to_string()))
    }

    /// Built-in stand-in for learned vectors: character-bigram counts of
    /// `^surface$` over the bigram vocabulary of the corpus. The boundary
    /// markers give every non-empty string at least one bigram.
    pub fn bigram_fallback<'a>(surfaces: impl IntoIterator<Item = &'a str>) -> Self {
        let surfaces: BTreeSet<&str> = surfaces.into_iter().filter(|s| !s.is_empty()).collect();
        let grams = |s: &str| -> Vec<(char, char)> {
            let chars: Vec<char> = core::iter::once('^')
                .chain(s.chars())
                .chain(core::iter::once('$'))
                .collect();
            chars.windows(2).map(|w| (w[0], w[1])).collect()
        };
        let vocab: Vec<(char, char)> = surfaces
            .iter()
            .flat_map(|s| grams(s))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut table = EmbeddingTable::new(vocab.len());
        for s in surfaces {
            let mut v = vec![0.0; vocab.len()];
            for g in grams(s) {
                v[vocab.binary_search(&g).unwrap()] += 1.0;
            }
            table.insert(s, v).expect("bigram vectors are non-zero");
        }
        table
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub text: f64,
    pub semantic: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights {
            text: 0.4,
            semantic: 0.6,
        }
    }
}

/// `w_text · jaccard + w_sem · cosine`.
pub fn combined_sim(
    a: &str,
    b: &str,
    emb: &EmbeddingTable,
    weights: SimilarityWeights,
    mode: TextMode,
) -> Result<f64, AlignError> {
    let va = emb.get(a)?;
    let vb = emb.get(b)?;
    let sem = cosine_sim(va, vb)?;
    Ok(weights.text * text_similarity(a, b, mode) + weights.semantic * sem)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    pub threshold: f64,
    pub weights: SimilarityWeights,
    pub text_mode: TextMode,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            threshold: 0.85,
            weights: SimilarityWeights::default(),
            text_mode: TextMode::CharSet,
        }
    }
}

/// One input surface string with its usage count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceForm {
    pub name: String,
    pub entity_type: EntityType,
    pub frequency: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub surface: String,
    /// Combined similarity to the canonical name.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub entity_type: EntityType,
    pub canonical: String,
    pub members: Vec<ClusterMember>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub canonical_map: BTreeMap<(EntityType, String), String>,
    pub clusters: Vec<Cluster>,
    pub threshold: f64,
}

impl AlignmentResult {
    pub fn canonical(&self, entity_type: EntityType, surface: &str) -> Option<&str> {
        self.canonical_map
            .get(&(entity_type, surface.to_string()))
            .map(String::as_str)
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            // smaller index becomes the root; keeps roots deterministic
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Greedy agglomeration: every same-type pair scoring at least the
/// threshold is merged, taking pairs in descending score (ties by name)
/// through a union-find. Each cluster is named after its most frequent
/// surface form, ties going to the lexicographically smallest.
pub fn align(
    forms: &[SurfaceForm],
    emb: &EmbeddingTable,
    options: &AlignOptions,
) -> Result<AlignmentResult, AlignError> {
    let threshold = options.threshold;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(AlignError::InvalidThreshold(threshold));
    }
    // canonical ordering makes the output independent of input order
    let mut forms: Vec<&SurfaceForm> = forms.iter().collect();
    forms.sort_by(|a, b| (a.entity_type, &a.name).cmp(&(b.entity_type, &b.name)));
    forms.dedup_by(|a, b| a.entity_type == b.entity_type && a.name == b.name);
    for f in &forms {
        emb.get(&f.name)?;
    }

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            if forms[i].entity_type != forms[j].entity_type {
                break;
            }
            let text = text_similarity(&forms[i].name, &forms[j].name, options.text_mode);
            // cosine is at most 1, so this bounds the combined score
            if options.weights.text * text + options.weights.semantic.abs() < threshold {
                continue;
            }
            let sim = combined_sim(&forms[i].name, &forms[j].name, emb, options.weights, options.text_mode)?;
            if sim >= threshold {
                pairs.push((sim, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| (&forms[a.1].name, &forms[a.2].name).cmp(&(&forms[b.1].name, &forms[b.2].name)))
    });
    let mut dsu = Dsu((0..forms.len()).collect());
    for &(_, i, j) in &pairs {
        dsu.union(i, j);
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..forms.len() {
        let root = dsu.find(i);
        groups.entry(root).or_default().push(i);
    }
    let mut canonical_map = BTreeMap::new();
    let mut clusters = Vec::with_capacity(groups.len());
    for (id, members) in groups.into_values().enumerate() {
        let canon = *members
            .iter()
            .max_by(|&&x, &&y| {
                forms[x]
                    .frequency
                    .cmp(&forms[y].frequency)
                    .then_with(|| forms[y].name.cmp(&forms[x].name))
            })
            .expect("non-empty group");
        let canonical = forms[canon].name.clone();
        let entity_type = forms[canon].entity_type;
        let mut cluster_members = Vec::with_capacity(members.len());
        for &m in &members {
            let score = if m == canon {
                1.0
            } else {
                combined_sim(&forms[m].name, &canonical, emb, options.weights, options.text_mode)?
            };
            canonical_map.insert((entity_type, forms[m].name.clone()), canonical.clone());
            cluster_members.push(ClusterMember {
                surface: forms[m].name.clone(),
                score,
            });
        }
        clusters.push(Cluster {
            id,
            entity_type,
            canonical,
            members: cluster_members,
        });
    }
    Ok(AlignmentResult {
        canonical_map,
        clusters,
        threshold,
    })
}

/// Surface forms of a graph's entities, weighted by triple multiplicity.
pub fn surface_forms(graph: &KnowledgeGraph) -> Vec<SurfaceForm> {
    let mut freq = vec![0u64; graph.len()];
    for t in graph.triples() {
        freq[t.head.index()] += t.multiplicity as u64;
        freq[t.tail.index()] += t.multiplicity as u64;
    }
    graph
        .entities()
        .iter()
        .map(|e| SurfaceForm {
            name: e.name.clone(),
            entity_type: e.entity_type,
            frequency: freq[e.id.index()],
        })
        .collect()
}

/// Aligns a graph's entities and rebuilds the graph on canonical names.
/// Merged names become aliases and duplicate triples add their multiplicities.
pub fn align_graph(
    graph: &KnowledgeGraph,
    emb: &EmbeddingTable,
    options: &AlignOptions,
) -> Result<(AlignmentResult, KnowledgeGraph), AlignError> {
    let result = align(&surface_forms(graph), emb, options)?;
    Ok((result.clone(), rewrite(graph, &result)))
}

/// Applies an alignment's canonical map to a graph.
pub fn rewrite(graph: &KnowledgeGraph, result: &AlignmentResult) -> KnowledgeGraph {
    let canon = |id: crate::model::EntityId| {
        let e = &graph.entities()[id.index()];
        result
            .canonical(e.entity_type, &e.name)
            .unwrap_or(&e.name)
            .to_string()
    };
    let mut builder = GraphBuilder::new();
    for e in graph.entities() {
        builder.add_entity(&canon(e.id), e.entity_type, e.aliases.iter().cloned());
    }
    for (i, t) in graph.triples().iter().enumerate() {
        let (h, tl) = (&graph.entities()[t.head.index()], &graph.entities()[t.tail.index()]);
        builder
            .add_triple(i, &canon(t.head), h.entity_type, t.predicate, &canon(t.tail), tl.entity_type, t.multiplicity)
            .expect("rewriting preserves the schema");
    }
    builder.build()
}
